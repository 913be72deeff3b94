#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "distdyk/funcs.hpp"
#include "distdyk/topology.hpp"

namespace distdyk {

enum class BlockKind { Node, Edge };

/// One dual block: a node function (id = node) or an edge subspace (id = subspace id).
struct BlockRef {
  BlockKind kind = BlockKind::Node;
  std::size_t id = 0;

  static BlockRef node(std::size_t i) { return {BlockKind::Node, i}; }
  static BlockRef edge(std::size_t id) { return {BlockKind::Edge, id}; }

  friend bool operator==(const BlockRef&, const BlockRef&) = default;
};

using BlockSet = std::vector<BlockRef>;

struct Cycle {
  std::vector<std::size_t> active_edges;  // subspace ids
  std::vector<BlockSet> blocks;           // w_bar entries
};

/// A finite list of cycles, repeated periodically: cycle n (1-based) is
/// cycles[(n - 1) % cycles.size()].
struct Schedule {
  std::size_t w_bar = 0;
  std::vector<Cycle> cycles;

  const Cycle& cycle(std::size_t n) const;
};

/// Last inner index w (1-based) at which `block` is scheduled in `cycle`.
std::optional<std::size_t> last_index(const Cycle& cycle, const BlockRef& block);

/// True iff the two blocks write a common (node, coordinate) entry.
bool supports_overlap(const BlockRef& a, const BlockRef& b, const SubspaceSet& subspaces);
/// True iff the block's dual is supported on node i.
bool touches(const BlockRef& block, std::size_t node, const SubspaceSet& subspaces);

/// Five-node star with edges (0,j): edge, pair, edge, pair, ... (w_bar = 8).
/// Throws PreconditionError for any other graph.
Schedule star_schedule(const SubspaceSet& subspaces);

enum class CyclicOrder { EdgesThenNodes, Interleaved };

/// Each subspace and each node once per cycle; V4 nodes form the leading block.
Schedule cyclic_schedule(const SubspaceSet& subspaces, std::span<const NodeClass> classes,
                         CyclicOrder order = CyclicOrder::Interleaved);

/// Per cycle, drops each subspace independently with probability `drop_prob`,
/// resampling until the survivors connect V (at most 10^4 attempts, then
/// StructuralError). Slots of dropped subspaces are filled with the node block
/// of the edge's first endpoint, so w_bar stays fixed.
Schedule time_varying_schedule(const SubspaceSet& subspaces, std::span<const NodeClass> classes, std::uint64_t seed,
                               double drop_prob, std::size_t num_cycles,
                               CyclicOrder order = CyclicOrder::Interleaved);

struct Finding {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::size_t cycle = 0;  // 1-based stored cycle
  std::size_t inner = 0;  // 1-based inner step, 0 for cycle-level findings
  std::string code;
  std::string message;
};

/// Structural errors make a schedule unusable; warnings flag violations of the
/// start-of-subroutine synchrony conditions, which the engine tolerates.
std::vector<Finding> validate(const Schedule& schedule, const SubspaceSet& subspaces,
                              std::span<const NodeClass> classes);

std::size_t count_errors(std::span<const Finding> findings);
std::size_t count_warnings(std::span<const Finding> findings);

}  // namespace distdyk
