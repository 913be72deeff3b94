#include "distdyk/schedule.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "distdyk/error.hpp"
#include "distdyk/rng.hpp"

namespace distdyk {

namespace {

std::string describe(const BlockRef& b, const SubspaceSet& subspaces) {
  if (b.kind == BlockKind::Node) return "node " + std::to_string(b.id);
  if (b.id >= subspaces.size()) return "edge #" + std::to_string(b.id);
  const Edge& e = subspaces.edge_of(b.id);
  std::string out = "edge (" + std::to_string(e.first) + "," + std::to_string(e.second);
  if (subspaces[b.id].coord) out += ";" + std::to_string(*subspaces[b.id].coord);
  return out + ")";
}

std::vector<std::size_t> v4_nodes(std::span<const NodeClass> classes) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == NodeClass::V4) out.push_back(i);
  }
  return out;
}

// Block layout shared by the cyclic and time-varying generators. `edge_slot`
// maps a subspace id to the block placed in its slot.
template <class EdgeSlot>
std::vector<BlockSet> layout(const SubspaceSet& subspaces, std::span<const NodeClass> classes, CyclicOrder order,
                             EdgeSlot edge_slot) {
  std::vector<BlockSet> blocks;
  const std::vector<std::size_t> v4 = v4_nodes(classes);
  if (!v4.empty()) {
    BlockSet first;
    for (std::size_t i : v4) first.push_back(BlockRef::node(i));
    blocks.push_back(std::move(first));
  }
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] != NodeClass::V4) others.push_back(i);
  }
  const std::size_t num_edges = subspaces.size();
  if (order == CyclicOrder::EdgesThenNodes) {
    for (std::size_t id = 0; id < num_edges; ++id) blocks.push_back({edge_slot(id)});
    for (std::size_t i : others) blocks.push_back({BlockRef::node(i)});
  } else {
    for (std::size_t k = 0; k < std::max(num_edges, others.size()); ++k) {
      if (k < num_edges) blocks.push_back({edge_slot(k)});
      if (k < others.size()) blocks.push_back({BlockRef::node(others[k])});
    }
  }
  return blocks;
}

}  // namespace

const Cycle& Schedule::cycle(std::size_t n) const {
  if (cycles.empty()) throw PreconditionError("Schedule has no cycles");
  if (n == 0) throw PreconditionError("cycles are numbered from 1");
  return cycles[(n - 1) % cycles.size()];
}

std::optional<std::size_t> last_index(const Cycle& cycle, const BlockRef& block) {
  for (std::size_t w = cycle.blocks.size(); w >= 1; --w) {
    const BlockSet& set = cycle.blocks[w - 1];
    if (std::find(set.begin(), set.end(), block) != set.end()) return w;
  }
  return std::nullopt;
}

bool touches(const BlockRef& block, std::size_t node, const SubspaceSet& subspaces) {
  if (block.kind == BlockKind::Node) return block.id == node;
  const Edge& e = subspaces.edge_of(block.id);
  return e.first == node || e.second == node;
}

bool supports_overlap(const BlockRef& a, const BlockRef& b, const SubspaceSet& subspaces) {
  // Support entries are (node, coordinate) with std::nullopt meaning every coordinate.
  auto entries = [&](const BlockRef& r) {
    std::vector<std::pair<std::size_t, std::optional<std::size_t>>> out;
    if (r.kind == BlockKind::Node) {
      out.emplace_back(r.id, std::nullopt);
    } else {
      const Edge& e = subspaces.edge_of(r.id);
      out.emplace_back(e.first, subspaces[r.id].coord);
      out.emplace_back(e.second, subspaces[r.id].coord);
    }
    return out;
  };
  for (const auto& [na, ka] : entries(a)) {
    for (const auto& [nb, kb] : entries(b)) {
      if (na == nb && (!ka || !kb || *ka == *kb)) return true;
    }
  }
  return false;
}

Schedule star_schedule(const SubspaceSet& subspaces) {
  const Graph& g = subspaces.graph();
  if (g.num_nodes() != 5 || g.edges().size() != 4) {
    throw PreconditionError("star_schedule: needs the five-node star with edges (0,j), j = 1..4");
  }
  Schedule s;
  s.w_bar = 8;
  Cycle c;
  for (std::size_t j = 1; j <= 4; ++j) {
    auto id = subspaces.find(0, j, std::nullopt);
    if (!id) throw PreconditionError("star_schedule: missing full-edge subspace for (0," + std::to_string(j) + ")");
    c.active_edges.push_back(*id);
    c.blocks.push_back({BlockRef::edge(*id)});
    c.blocks.push_back({BlockRef::node(0), BlockRef::node(j)});
  }
  s.cycles.push_back(std::move(c));
  return s;
}

Schedule cyclic_schedule(const SubspaceSet& subspaces, std::span<const NodeClass> classes, CyclicOrder order) {
  if (classes.size() != subspaces.graph().num_nodes()) throw StructuralError("cyclic_schedule: class count mismatch");
  Cycle c;
  c.active_edges = subspaces.all_ids();
  c.blocks = layout(subspaces, classes, order, [](std::size_t id) { return BlockRef::edge(id); });
  Schedule s;
  s.w_bar = c.blocks.size();
  s.cycles.push_back(std::move(c));
  return s;
}

Schedule time_varying_schedule(const SubspaceSet& subspaces, std::span<const NodeClass> classes, std::uint64_t seed,
                               double drop_prob, std::size_t num_cycles, CyclicOrder order) {
  if (!(drop_prob >= 0.0 && drop_prob < 1.0)) throw PreconditionError("time_varying_schedule: drop_prob must be in [0,1)");
  if (classes.size() != subspaces.graph().num_nodes()) {
    throw StructuralError("time_varying_schedule: class count mismatch");
  }
  if (num_cycles == 0) throw PreconditionError("time_varying_schedule: need at least one cycle");
  constexpr int kMaxAttempts = 10000;
  Rng rng(seed);
  Schedule s;
  for (std::size_t n = 0; n < num_cycles; ++n) {
    std::vector<std::size_t> active;
    bool found = false;
    for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
      active.clear();
      for (std::size_t id = 0; id < subspaces.size(); ++id) {
        if (rng.uniform() >= drop_prob) active.push_back(id);
      }
      found = connects(active, subspaces);
    }
    if (!found) throw StructuralError("time_varying_schedule: no connected edge set within 10^4 draws");
    Cycle c;
    c.blocks = layout(subspaces, classes, order, [&](std::size_t id) {
      if (std::binary_search(active.begin(), active.end(), id)) return BlockRef::edge(id);
      return BlockRef::node(subspaces.edge_of(id).first);
    });
    c.active_edges = std::move(active);
    s.w_bar = c.blocks.size();
    s.cycles.push_back(std::move(c));
  }
  return s;
}

std::vector<Finding> validate(const Schedule& schedule, const SubspaceSet& subspaces,
                              std::span<const NodeClass> classes) {
  std::vector<Finding> out;
  const std::size_t num_nodes = subspaces.graph().num_nodes();
  auto error = [&](std::size_t n, std::size_t w, std::string code, std::string msg) {
    out.push_back({Finding::Severity::Error, n, w, std::move(code), std::move(msg)});
  };
  auto warn = [&](std::size_t n, std::size_t w, std::string code, std::string msg) {
    out.push_back({Finding::Severity::Warning, n, w, std::move(code), std::move(msg)});
  };
  if (classes.size() != num_nodes) {
    error(0, 0, "class-count", "class list does not match the number of nodes");
    return out;
  }
  if (schedule.w_bar == 0 || schedule.cycles.empty()) {
    error(0, 0, "empty-schedule", "schedule needs w_bar >= 1 and at least one cycle");
    return out;
  }
  const std::vector<std::size_t> v4 = v4_nodes(classes);
  auto is_v4 = [&](const BlockRef& b) { return b.kind == BlockKind::Node && classes[b.id] == NodeClass::V4; };

  for (std::size_t c = 0; c < schedule.cycles.size(); ++c) {
    const std::size_t n = c + 1;
    const Cycle& cycle = schedule.cycles[c];
    if (cycle.blocks.size() != schedule.w_bar) {
      error(n, 0, "w-bar-mismatch",
            "cycle has " + std::to_string(cycle.blocks.size()) + " blocks, expected " + std::to_string(schedule.w_bar));
    }
    bool ids_ok = true;
    for (std::size_t id : cycle.active_edges) {
      if (id >= subspaces.size()) {
        error(n, 0, "unknown-edge", "active edge id " + std::to_string(id) + " out of range");
        ids_ok = false;
      }
    }
    std::set<std::size_t> used_edges;
    std::vector<bool> node_seen(num_nodes, false);
    for (std::size_t w = 1; w <= cycle.blocks.size(); ++w) {
      const BlockSet& set = cycle.blocks[w - 1];
      if (set.empty()) {
        error(n, w, "empty-block", "block set is empty");
        continue;
      }
      bool set_ok = true;
      for (const BlockRef& b : set) {
        const std::size_t limit = b.kind == BlockKind::Node ? num_nodes : subspaces.size();
        if (b.id >= limit) {
          error(n, w, "unknown-block", describe(b, subspaces) + " out of range");
          set_ok = ids_ok = false;
        }
      }
      if (!set_ok) continue;
      for (const BlockRef& b : set) {
        if (b.kind == BlockKind::Node) {
          node_seen[b.id] = true;
        } else {
          used_edges.insert(b.id);
        }
      }
      const bool any_v4 = std::any_of(set.begin(), set.end(), is_v4);
      const bool all_v4 = std::all_of(set.begin(), set.end(), is_v4);
      if (any_v4 && !all_v4) error(n, w, "mixed-block", "block mixes V4 nodes with other blocks");
      for (std::size_t a = 0; a < set.size(); ++a) {
        for (std::size_t b = a + 1; b < set.size(); ++b) {
          if (set[a] == set[b] || supports_overlap(set[a], set[b], subspaces)) {
            error(n, w, "overlapping-block",
                  describe(set[a], subspaces) + " and " + describe(set[b], subspaces) + " share support");
          }
        }
      }
    }
    if (!ids_ok) continue;

    std::set<std::size_t> active(cycle.active_edges.begin(), cycle.active_edges.end());
    if (active != used_edges) {
      error(n, 0, "active-edges-mismatch", "active edge set mismatch: E_n differs from the edges used by the blocks");
    }
    if (!connects(cycle.active_edges, subspaces)) error(n, 0, "disconnected", "active edge set does not connect V");
    for (std::size_t i = 0; i < num_nodes; ++i) {
      if (!node_seen[i]) error(n, 0, "node-not-covered", "node " + std::to_string(i) + " is never scheduled");
    }

    if (v4.empty()) continue;
    {
      const BlockSet& first = cycle.blocks.front();
      bool equal = first.size() == v4.size();
      for (std::size_t i : v4) {
        if (std::find(first.begin(), first.end(), BlockRef::node(i)) == first.end()) equal = false;
      }
      if (!equal) warn(n, 1, "first-block-not-v4", "first block of the cycle is not the V4 node set");
    }
    // A block touching a V4 node i between two of its subgradient updates, or
    // after its last update in the cycle, leaves [z_i]_i stale.
    std::set<std::pair<std::size_t, std::size_t>> reported;  // (node, w')
    auto flag = [&](std::size_t i, std::size_t w_prime, const char* when) {
      if (!reported.insert({i, w_prime}).second) return;
      warn(n, w_prime, "stale-v4-dual",
           "block touches V4 node " + std::to_string(i) + " " + when);
    };
    std::vector<std::optional<std::size_t>> last_update(num_nodes);
    for (std::size_t w = 1; w <= cycle.blocks.size(); ++w) {
      const BlockSet& set = cycle.blocks[w - 1];
      const bool v4_step = !set.empty() && std::all_of(set.begin(), set.end(), is_v4);
      if (!v4_step) continue;
      if (w > 1) {
        for (std::size_t i : v4) {
          if (!last_update[i]) continue;
          for (std::size_t wp = *last_update[i] + 1; wp < w; ++wp) {
            for (const BlockRef& b : cycle.blocks[wp - 1]) {
              if (touches(b, i, subspaces)) flag(i, wp, "between its subgradient updates");
            }
          }
        }
      }
      for (const BlockRef& b : set) last_update[b.id] = w;
    }
    for (std::size_t i : v4) {
      const std::size_t p = last_update[i].value_or(0);
      for (std::size_t wp = p + 1; wp <= cycle.blocks.size(); ++wp) {
        for (const BlockRef& b : cycle.blocks[wp - 1]) {
          if (touches(b, i, subspaces)) flag(i, wp, "after its last update in the cycle");
        }
      }
    }
  }
  return out;
}

std::size_t count_errors(std::span<const Finding> findings) {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Finding::Severity::Error;
  }));
}

std::size_t count_warnings(std::span<const Finding> findings) {
  return findings.size() - count_errors(findings);
}

}  // namespace distdyk
