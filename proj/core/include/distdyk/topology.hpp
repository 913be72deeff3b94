#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "distdyk/stacked_vector.hpp"

namespace distdyk {

/// Undirected edge {first, second}; the dual payload is +t on `first` and -t on `second`.
struct Edge {
  std::size_t first = 0;
  std::size_t second = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected simple graph on nodes 0..num_nodes-1.
class Graph {
 public:
  Graph() = default;
  /// Throws StructuralError on self-loops, duplicates, or out-of-range endpoints.
  Graph(std::size_t num_nodes, std::vector<Edge> edges);

  static Graph star(std::size_t num_nodes);  // centre is node 0
  static Graph path(std::size_t num_nodes);
  static Graph ring(std::size_t num_nodes);

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Index of the edge joining a and b (either orientation).
  std::optional<std::size_t> find_edge(std::size_t a, std::size_t b) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
};

/// Consensus subspace attached to one graph edge. With `coord` empty it is
/// {x : [x]_i = [x]_j}; otherwise {x : [x]_i[k] = [x]_j[k]} for k = *coord.
struct EdgeSubspace {
  std::size_t edge = 0;
  std::optional<std::size_t> coord;

  bool covers(std::size_t k) const noexcept { return !coord || *coord == k; }
  std::size_t payload_dim(std::size_t m) const noexcept { return coord ? 1 : m; }

  friend bool operator==(const EdgeSubspace&, const EdgeSubspace&) = default;
};

/// The full collection of edge subspaces a problem is posed with, tied to one graph and one m.
class SubspaceSet {
 public:
  SubspaceSet() = default;
  SubspaceSet(const Graph& graph, std::size_t dim, std::vector<EdgeSubspace> subspaces);

  /// One whole-block equality subspace per edge.
  static SubspaceSet full_edges(const Graph& graph, std::size_t dim);
  /// One subspace per (edge, coordinate) pair, ordered edge-major.
  static SubspaceSet per_coordinate(const Graph& graph, std::size_t dim);

  const Graph& graph() const noexcept { return graph_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return subspaces_.size(); }
  const EdgeSubspace& operator[](std::size_t id) const { return subspaces_.at(id); }
  const std::vector<EdgeSubspace>& all() const noexcept { return subspaces_; }

  const Edge& edge_of(std::size_t id) const { return graph_.edges().at(subspaces_.at(id).edge); }
  std::optional<std::size_t> find(std::size_t a, std::size_t b, std::optional<std::size_t> coord) const;

  /// Expands a payload for subspace `id` into a stacked vector lying in its orthogonal complement.
  StackedVector expand(std::size_t id, const Vec& payload) const;
  /// Adds `scale` times the expansion of `payload` into `target` without allocating.
  void accumulate(std::size_t id, const Vec& payload, double scale, StackedVector& target) const;

  std::vector<std::size_t> all_ids() const;

 private:
  Graph graph_;
  std::size_t dim_ = 0;
  std::vector<EdgeSubspace> subspaces_;
};

/// True iff the intersection of the active subspaces is the consensus diagonal D,
/// i.e. for every coordinate the edges covering it connect all nodes.
bool connects(std::span<const std::size_t> active, const SubspaceSet& subspaces);

/// Orthogonal projection onto D: every block becomes the mean block.
StackedVector project_D(const StackedVector& u);

/// True iff the blocks of v sum to zero per coordinate within `tol` (membership in D-perp).
bool in_D_perp(const StackedVector& v, double tol = 1e-9);

struct DecompositionReport {
  /// One payload per subspace of the set; zero for inactive subspaces.
  std::vector<Vec> payloads;
  double max_component_norm = 0.0;
  double input_norm = 0.0;
};

/// Writes v in D-perp as a sum of edge duals supported on `active`, choosing for
/// each coordinate the minimum-norm flow (graph-Laplacian potential differences).
/// Throws PreconditionError when v is not in D-perp (1e-9 per coordinate) or
/// `active` does not connect the nodes.
DecompositionReport decompose_edge_duals(const StackedVector& v, std::span<const std::size_t> active,
                                         const SubspaceSet& subspaces);

/// Sum of the expansions of all payloads.
StackedVector sum_expansions(std::span<const Vec> payloads, const SubspaceSet& subspaces);

}  // namespace distdyk
