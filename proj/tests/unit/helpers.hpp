#pragma once

#include <initializer_list>
#include <vector>

#include "distdyk/instances.hpp"
#include "distdyk/rng.hpp"
#include "distdyk/stacked_vector.hpp"

namespace testing {

inline distdyk::Vec vec(std::initializer_list<double> xs) {
  distdyk::Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

inline distdyk::Vec random_vec(distdyk::Rng& rng, Eigen::Index m, double lo = -1.0, double hi = 1.0) {
  return distdyk::Vec::NullaryExpr(m, [&] { return rng.uniform(lo, hi); });
}

inline distdyk::Mat random_psd(distdyk::Rng& rng, Eigen::Index m) {
  const distdyk::Vec v = distdyk::Vec::NullaryExpr(m, [&] { return rng.uniform(); });
  return v * v.transpose() + rng.uniform(0.1, 1.0) * distdyk::Mat::Identity(m, m);
}

/// Instance on `graph` with the given per-node functions and anchor blocks, nothing planted.
inline distdyk::Instance make_instance(distdyk::Graph graph, std::vector<distdyk::NodeFunction> functions,
                                       const std::vector<distdyk::Vec>& anchor) {
  distdyk::Instance inst;
  inst.graph = std::move(graph);
  inst.dim = static_cast<std::size_t>(anchor.front().size());
  inst.anchor = distdyk::StackedVector::from_blocks(anchor);
  inst.functions = std::move(functions);
  for (const auto& f : inst.functions) inst.smoothness.push_back(distdyk::curvature_bound(f));
  inst.validate();
  return inst;
}

}  // namespace testing
