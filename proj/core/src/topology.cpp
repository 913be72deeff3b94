#include "distdyk/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "distdyk/error.hpp"

namespace distdyk {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), components_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent_[a] = b;
      --components_;
    }
  }

  std::size_t components() const noexcept { return components_; }

 private:
  std::vector<std::size_t> parent_;
  std::size_t components_;
};

std::vector<std::size_t> ids_covering(std::span<const std::size_t> active, const SubspaceSet& subspaces,
                                      std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t id : active) {
    if (subspaces[id].covers(k)) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes), edges_(std::move(edges)) {
  if (num_nodes_ == 0) throw StructuralError("Graph: needs at least one node");
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.first >= num_nodes_ || edge.second >= num_nodes_) {
      throw StructuralError("Graph: edge endpoint out of range");
    }
    if (edge.first == edge.second) throw StructuralError("Graph: self-loop on node " + std::to_string(edge.first));
    for (std::size_t f = 0; f < e; ++f) {
      const Edge& other = edges_[f];
      if ((other.first == edge.first && other.second == edge.second) ||
          (other.first == edge.second && other.second == edge.first)) {
        throw StructuralError("Graph: duplicate edge (" + std::to_string(edge.first) + "," +
                              std::to_string(edge.second) + ")");
      }
    }
  }
}

Graph Graph::star(std::size_t num_nodes) {
  std::vector<Edge> edges;
  for (std::size_t j = 1; j < num_nodes; ++j) edges.push_back({0, j});
  return Graph(num_nodes, std::move(edges));
}

Graph Graph::path(std::size_t num_nodes) {
  std::vector<Edge> edges;
  for (std::size_t j = 1; j < num_nodes; ++j) edges.push_back({j - 1, j});
  return Graph(num_nodes, std::move(edges));
}

Graph Graph::ring(std::size_t num_nodes) {
  if (num_nodes < 3) return path(num_nodes);
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < num_nodes; ++j) edges.push_back({j, (j + 1) % num_nodes});
  return Graph(num_nodes, std::move(edges));
}

std::optional<std::size_t> Graph::find_edge(std::size_t a, std::size_t b) const {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if ((edges_[e].first == a && edges_[e].second == b) || (edges_[e].first == b && edges_[e].second == a)) {
      return e;
    }
  }
  return std::nullopt;
}

SubspaceSet::SubspaceSet(const Graph& graph, std::size_t dim, std::vector<EdgeSubspace> subspaces)
    : graph_(graph), dim_(dim), subspaces_(std::move(subspaces)) {
  if (dim_ == 0) throw StructuralError("SubspaceSet: dimension must be >= 1");
  for (std::size_t a = 0; a < subspaces_.size(); ++a) {
    const EdgeSubspace& s = subspaces_[a];
    if (s.edge >= graph_.edges().size()) throw StructuralError("SubspaceSet: edge index out of range");
    if (s.coord && *s.coord >= dim_) throw StructuralError("SubspaceSet: coordinate out of range");
    for (std::size_t b = 0; b < a; ++b) {
      if (subspaces_[b] == s) throw StructuralError("SubspaceSet: duplicate subspace");
    }
  }
}

SubspaceSet SubspaceSet::full_edges(const Graph& graph, std::size_t dim) {
  std::vector<EdgeSubspace> out;
  for (std::size_t e = 0; e < graph.edges().size(); ++e) out.push_back({e, std::nullopt});
  return SubspaceSet(graph, dim, std::move(out));
}

SubspaceSet SubspaceSet::per_coordinate(const Graph& graph, std::size_t dim) {
  std::vector<EdgeSubspace> out;
  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    for (std::size_t k = 0; k < dim; ++k) out.push_back({e, k});
  }
  return SubspaceSet(graph, dim, std::move(out));
}

std::optional<std::size_t> SubspaceSet::find(std::size_t a, std::size_t b, std::optional<std::size_t> coord) const {
  auto edge = graph_.find_edge(a, b);
  if (!edge) return std::nullopt;
  for (std::size_t id = 0; id < subspaces_.size(); ++id) {
    if (subspaces_[id].edge == *edge && subspaces_[id].coord == coord) return id;
  }
  return std::nullopt;
}

void SubspaceSet::accumulate(std::size_t id, const Vec& payload, double scale, StackedVector& target) const {
  const EdgeSubspace& s = subspaces_.at(id);
  const Edge& e = graph_.edges()[s.edge];
  if (static_cast<std::size_t>(payload.size()) != s.payload_dim(dim_)) {
    throw StructuralError("edge payload has wrong dimension");
  }
  if (s.coord) {
    const auto k = static_cast<Eigen::Index>(*s.coord);
    target.block(e.first)(k) += scale * payload(0);
    target.block(e.second)(k) -= scale * payload(0);
  } else {
    target.block(e.first) += scale * payload;
    target.block(e.second) -= scale * payload;
  }
}

StackedVector SubspaceSet::expand(std::size_t id, const Vec& payload) const {
  StackedVector out(graph_.num_nodes(), dim_);
  accumulate(id, payload, 1.0, out);
  return out;
}

std::vector<std::size_t> SubspaceSet::all_ids() const {
  std::vector<std::size_t> ids(subspaces_.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ids;
}

bool connects(std::span<const std::size_t> active, const SubspaceSet& subspaces) {
  const std::size_t n = subspaces.graph().num_nodes();
  for (std::size_t k = 0; k < subspaces.dim(); ++k) {
    DisjointSets sets(n);
    for (std::size_t id : active) {
      if (!subspaces[id].covers(k)) continue;
      const Edge& e = subspaces.edge_of(id);
      sets.unite(e.first, e.second);
    }
    if (sets.components() != 1) return false;
  }
  return true;
}

StackedVector project_D(const StackedVector& u) {
  const Vec mean = u.matrix().rowwise().mean();
  return StackedVector::replicate(mean, u.num_blocks());
}

bool in_D_perp(const StackedVector& v, double tol) {
  return (v.matrix().rowwise().sum().cwiseAbs().array() <= tol).all();
}

DecompositionReport decompose_edge_duals(const StackedVector& v, std::span<const std::size_t> active,
                                         const SubspaceSet& subspaces) {
  const std::size_t n = subspaces.graph().num_nodes();
  const std::size_t m = subspaces.dim();
  if (v.num_blocks() != n || v.dim() != m) throw StructuralError("decompose_edge_duals: shape mismatch");
  if (!in_D_perp(v)) throw PreconditionError("decompose_edge_duals: input is not in D-perp");
  for (std::size_t id : active) {
    if (id >= subspaces.size()) throw PreconditionError("decompose_edge_duals: unknown subspace id");
  }
  if (!connects(active, subspaces)) throw PreconditionError("decompose_edge_duals: active set does not connect V");

  DecompositionReport report;
  report.payloads.reserve(subspaces.size());
  for (const EdgeSubspace& s : subspaces.all()) report.payloads.push_back(Vec::Zero(static_cast<Eigen::Index>(s.payload_dim(m))));
  report.input_norm = std::sqrt(norm_sq(v));

  std::vector<std::size_t> cached_ids;
  Eigen::LDLT<Mat> factor;
  bool have_factor = false;
  const auto nn = static_cast<Eigen::Index>(n);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<std::size_t> ids = ids_covering(active, subspaces, k);
    if (!have_factor || ids != cached_ids) {
      // Laplacian of the covering subgraph plus the rank-one gauge term 11^T/n,
      // which is positive definite when the subgraph is connected.
      Mat lap = Mat::Constant(nn, nn, 1.0 / static_cast<double>(n));
      for (std::size_t id : ids) {
        const Edge& e = subspaces.edge_of(id);
        const auto a = static_cast<Eigen::Index>(e.first);
        const auto b = static_cast<Eigen::Index>(e.second);
        lap(a, a) += 1.0;
        lap(b, b) += 1.0;
        lap(a, b) -= 1.0;
        lap(b, a) -= 1.0;
      }
      factor.compute(lap);
      cached_ids = ids;
      have_factor = true;
    }
    const Vec divergence = v.matrix().row(static_cast<Eigen::Index>(k)).transpose();
    const Vec potential = factor.solve(divergence);
    for (std::size_t id : ids) {
      const Edge& e = subspaces.edge_of(id);
      const double flow = potential(static_cast<Eigen::Index>(e.first)) - potential(static_cast<Eigen::Index>(e.second));
      if (subspaces[id].coord) {
        report.payloads[id](0) = flow;
      } else {
        report.payloads[id](static_cast<Eigen::Index>(k)) = flow;
      }
    }
  }
  for (std::size_t id = 0; id < subspaces.size(); ++id) {
    // ||expansion|| = sqrt(2) * ||payload||
    report.max_component_norm = std::max(report.max_component_norm, std::sqrt(2.0) * report.payloads[id].norm());
  }
  return report;
}

StackedVector sum_expansions(std::span<const Vec> payloads, const SubspaceSet& subspaces) {
  if (payloads.size() != subspaces.size()) throw StructuralError("sum_expansions: payload count mismatch");
  StackedVector out(subspaces.graph().num_nodes(), subspaces.dim());
  for (std::size_t id = 0; id < payloads.size(); ++id) subspaces.accumulate(id, payloads[id], 1.0, out);
  return out;
}

}  // namespace distdyk
