#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "distdyk/funcs.hpp"
#include "distdyk/stacked_vector.hpp"
#include "distdyk/topology.hpp"

namespace distdyk {

/// A consensus problem  min_x sum_i 1/2||x - anchor_i||^2 + f_i(x)  on a graph.
struct Instance {
  Graph graph;
  std::size_t dim = 0;
  StackedVector anchor;
  std::vector<NodeFunction> functions;
  std::optional<Vec> planted_optimum;
  /// Largest curvature of each node function, for reporting.
  std::vector<double> smoothness;

  std::size_t num_nodes() const noexcept { return graph.num_nodes(); }
  std::vector<NodeClass> classes() const;

  /// Shape checks: one function per node, matching dimensions. Throws StructuralError.
  void validate() const;
};

enum class Family { Smooth, Nonsmooth };
enum class GraphShape { Star, Path, Ring };

Family family_from_string(std::string_view s);
GraphShape graph_shape_from_string(std::string_view s);

/// Quadratic family with planted optimum e = ones(m).
///
/// Draw order per node: v (m draws), r (1 draw), target subgradient v_i (m draws).
/// A_i = v v^T + r I, b_i = v_i - A_i e, c_i = 0; every anchor block is e + mean_i(v_i).
Instance gen_smooth(std::uint64_t seed, std::size_t num_nodes, std::size_t dim, GraphShape shape = GraphShape::Star);

/// Max-of-two-quadratics family with planted optimum e, kinked at e.
///
/// Draw order per node: v, r, v_i as above, then d (m draws, redrawn while ||d|| < 1e-6).
/// b_{i,1} = v_i - A_i e + d, b_{i,2} = v_i - A_i e - d, c_{i,1} = 0, c_{i,2} = 2 d^T e.
Instance gen_nonsmooth(std::uint64_t seed, std::size_t num_nodes, std::size_t dim,
                       GraphShape shape = GraphShape::Star);

Instance generate(Family family, std::uint64_t seed, std::size_t num_nodes, std::size_t dim,
                  GraphShape shape = GraphShape::Star);

/// sum_i [1/2||x - anchor_i||^2 + f_i(x)]; +infinity if an indicator is violated.
double primal_value_at(const Instance& instance, const Vec& x);

/// The subgradient each node designates at x (the one the planted certificate uses).
std::vector<Vec> designated_subgradients(const Instance& instance, const Vec& x);

/// || sum_i v_i + |V| (e - anchor_mean) ||_inf at the planted optimum; NaN when nothing is planted.
double planted_certificate_residual(const Instance& instance);

enum class Treatment { Subdiff, Prox };
Treatment treatment_from_string(std::string_view s);

/// Reclassifies every full-domain function as V4 (Subdiff) or V1 (Prox); indicators are untouched.
Instance with_treatment(const Instance& instance, Treatment treatment);

}  // namespace distdyk
