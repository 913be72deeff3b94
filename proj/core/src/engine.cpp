#include "distdyk/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "distdyk/error.hpp"

namespace distdyk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// A V4 dual that was never updated counts as lying on its minorant's slope within this distance.
constexpr double kSlopeTol = 1e-8;

}  // namespace

Engine::Engine(Instance instance, SubspaceSet subspaces, Schedule schedule)
    : instance_(std::move(instance)), subspaces_(std::move(subspaces)), schedule_(std::move(schedule)) {
  instance_.validate();
  const Graph& g = subspaces_.graph();
  if (g.num_nodes() != instance_.num_nodes() || g.edges() != instance_.graph.edges() ||
      subspaces_.dim() != instance_.dim) {
    throw PreconditionError("Engine: subspace set does not match the instance graph or dimension");
  }
  const std::vector<NodeClass> classes = instance_.classes();
  std::vector<Finding> findings = validate(schedule_, subspaces_, classes);
  for (const Finding& f : findings) {
    if (f.severity == Finding::Severity::Error) {
      throw PreconditionError("Engine: invalid schedule (cycle " + std::to_string(f.cycle) + ", step " +
                              std::to_string(f.inner) + "): " + f.message);
    }
  }
  findings_ = std::move(findings);
  anchor_norm_sq_ = norm_sq(instance_.anchor);
  init();
}

void Engine::init(std::optional<std::vector<Vec>> node_duals, std::optional<StackedVector> v_H) {
  const std::size_t n = instance_.num_nodes();
  const std::size_t m = instance_.dim;
  const auto mm = static_cast<Eigen::Index>(m);

  if (node_duals) {
    if (node_duals->size() != n) throw StructuralError("Engine::init: need one node dual per node");
    for (const Vec& z : *node_duals) {
      if (z.size() != mm) throw StructuralError("Engine::init: node dual has the wrong dimension");
    }
    node_duals_ = std::move(*node_duals);
  } else {
    node_duals_.assign(n, Vec::Zero(mm));
  }

  payloads_.clear();
  for (const EdgeSubspace& s : subspaces_.all()) {
    payloads_.push_back(Vec::Zero(static_cast<Eigen::Index>(s.payload_dim(m))));
  }
  v_H_ = StackedVector(n, m);
  if (v_H) {
    if (v_H->num_blocks() != n || v_H->dim() != m) throw StructuralError("Engine::init: v_H has the wrong shape");
    if (!in_D_perp(*v_H)) throw PreconditionError("Engine::init: v_H is not in D-perp");
    if (norm_sq(*v_H) > 0.0) {
      const std::vector<std::size_t> all = subspaces_.all_ids();
      DecompositionReport report = decompose_edge_duals(*v_H, all, subspaces_);
      payloads_ = std::move(report.payloads);
      v_H_ = sum_expansions(payloads_, subspaces_);
    }
  }

  minorants_.assign(n, std::nullopt);
  updated_.assign(n, false);
  witnesses_.assign(n, std::nullopt);
  conjugates_.assign(n, 0.0);
  max_subgradient_norm_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeFunction& f = instance_.functions[i];
    if (f.node_class() == NodeClass::V4) {
      minorants_[i] = AffineMinorant::tangent(f, primal_block(i));
      max_subgradient_norm_[i] = minorants_[i]->slope.norm();
    } else {
      witnesses_[i] = conjugate_witness(f, node_duals_[i]);
    }
    refresh_conjugate(i);
  }
  n_ = 0;
  w_ = 0;
  initialised_ = true;
}

double Engine::node_conjugate(std::size_t i) const {
  const NodeFunction& f = instance_.functions[i];
  const Vec& z = node_duals_[i];
  if (f.node_class() == NodeClass::V4) {
    const AffineMinorant& m = *minorants_[i];
    if (updated_[i]) return conjugate_at(m, z);
    return (z - m.slope).norm() <= kSlopeTol ? -m.intercept : kInf;
  }
  if (!witnesses_[i]) return kInf;
  return conjugate_at(f, z, *witnesses_[i]);
}

void Engine::refresh_conjugate(std::size_t i) { conjugates_[i] = node_conjugate(i); }

double Engine::assemble_dual(const StackedVector& x, double conjugate_sum) const {
  if (conjugate_sum == kInf) return -kInf;
  return 0.5 * anchor_norm_sq_ - 0.5 * norm_sq(x) - conjugate_sum;
}

double Engine::dual_value() const {
  double sum = 0.0;
  for (double c : conjugates_) sum += c;
  return assemble_dual(primal_estimate(), sum);
}

double Engine::dual_value_from_scratch() const {
  StackedVector x = instance_.anchor - sum_expansions(payloads_, subspaces_);
  double sum = 0.0;
  for (std::size_t i = 0; i < node_duals_.size(); ++i) {
    x.block(i) -= node_duals_[i];
    sum += node_conjugate(i);
  }
  return assemble_dual(x, sum);
}

StackedVector Engine::primal_estimate() const {
  StackedVector x = instance_.anchor - v_H_;
  for (std::size_t i = 0; i < node_duals_.size(); ++i) x.block(i) -= node_duals_[i];
  return x;
}

Vec Engine::primal_block(std::size_t i) const {
  return instance_.anchor.block(i) - v_H_.block(i) - node_duals_.at(i);
}

void Engine::set_reference(Vec x_star, double primal_value) {
  if (x_star.size() != static_cast<Eigen::Index>(instance_.dim)) {
    throw StructuralError("Engine::set_reference: reference point has the wrong dimension");
  }
  reference_ = std::make_pair(std::move(x_star), primal_value);
}

const Vec& Engine::reference_point() const {
  if (!reference_) throw PreconditionError("Engine: no reference optimum set");
  return reference_->first;
}

double Engine::reference_value() const {
  if (!reference_) throw PreconditionError("Engine: no reference optimum set");
  return reference_->second;
}

double Engine::duality_gap() const {
  if (!reference_) return kNaN;
  return reference_->second - dual_value();
}

double Engine::dist_sq() const {
  if (!reference_) return kNaN;
  StackedVector x = primal_estimate();
  x.matrix().colwise() -= reference_->first;
  return 0.5 * norm_sq(x);
}

ResetInfo Engine::reset_edges(std::span<const std::size_t> active) {
  ResetInfo info;
  info.n = n_;
  info.dual_before = dual_value();
  DecompositionReport report = decompose_edge_duals(v_H_, active, subspaces_);
  StackedVector rebuilt = sum_expansions(report.payloads, subspaces_);
  info.sum_drift = (rebuilt.matrix() - v_H_.matrix()).cwiseAbs().maxCoeff();
  info.max_component_norm = report.max_component_norm;
  payloads_ = std::move(report.payloads);
  v_H_ = std::move(rebuilt);
  w_ = 0;
  info.dual_after = dual_value();
  return info;
}

void Engine::edge_step(std::size_t id) {
  const Edge& e = subspaces_.edge_of(id);
  const std::optional<std::size_t> coord = subspaces_[id].coord;
  Vec& t = payloads_[id];
  Vec xi = primal_block(e.first);
  Vec xj = primal_block(e.second);
  Vec yi, yj;
  if (coord) {
    const auto k = static_cast<Eigen::Index>(*coord);
    yi = Vec::Constant(1, xi(k) + t(0));
    yj = Vec::Constant(1, xj(k) - t(0));
  } else {
    yi = xi + t;
    yj = xj - t;
  }
  // Projection of (y_i, y_j) onto {(s, -s)}.
  const Vec next = 0.5 * (yi - yj);
  subspaces_.accumulate(id, next - t, 1.0, v_H_);
  t = next;
}

NodeStepRecord Engine::prox_step(std::size_t i) {
  const NodeFunction& f = instance_.functions[i];
  NodeStepRecord rec;
  rec.node = i;
  rec.center = instance_.anchor.block(i) - v_H_.block(i);
  ProxResult r = prox(f, rec.center);
  node_duals_[i] = r.z;
  witnesses_[i] = r.x;
  refresh_conjugate(i);
  rec.x_solved = std::move(r.x);
  rec.z = std::move(r.z);
  return rec;
}

NodeStepRecord Engine::subdiff_update(std::size_t i) {
  if (!initialised_) throw PreconditionError("Engine: not initialised");
  if (!is_v4(i)) throw PreconditionError("subdiff_update: node " + std::to_string(i) + " is not V4");
  const NodeFunction& f = instance_.functions[i];
  NodeStepRecord rec;
  rec.node = i;
  rec.subgradient_step = true;
  rec.center = instance_.anchor.block(i) - v_H_.block(i);
  const Vec q = rec.center - node_duals_[i];
  const AffineMinorant cut = AffineMinorant::tangent(f, q);
  max_subgradient_norm_[i] = std::max(max_subgradient_norm_[i], cut.slope.norm());

  const AffineMinorant& old = *minorants_[i];
  AffinePairProx r = prox_max_two_affine(old.slope, old.intercept, cut.slope, cut.intercept, rec.center,
                                         minorant_gap(f, old, cut, rec.center));
  const Vec& x = r.result.x;
  // The new minorant takes the value of max{old, cut} at x, i.e. the smaller
  // of the two linearisation errors.
  const double error = std::min(linearization_error(f, old, x), linearization_error(f, cut, x));
  AffineMinorant next{r.result.z, eval(f, x) - error - r.result.z.dot(x), x, error};

  minorants_[i] = std::move(next);
  node_duals_[i] = r.result.z;
  updated_[i] = true;
  refresh_conjugate(i);
  rec.x_solved = x;
  rec.z = r.result.z;
  return rec;
}

StepInfo Engine::step_block(const BlockSet& blocks) {
  if (!initialised_) throw PreconditionError("Engine: not initialised");
  if (blocks.empty()) throw PreconditionError("step_block: empty block set");
  for (const BlockRef& b : blocks) {
    const std::size_t limit = b.kind == BlockKind::Node ? instance_.num_nodes() : subspaces_.size();
    if (b.id >= limit) throw PreconditionError("step_block: block id out of range");
  }
  auto v4 = [&](const BlockRef& b) { return b.kind == BlockKind::Node && is_v4(b.id); };
  const bool all_v4 = std::all_of(blocks.begin(), blocks.end(), v4);
  if (!all_v4 && std::any_of(blocks.begin(), blocks.end(), v4)) {
    throw UnsupportedError("step_block: block set mixes V4 nodes with other blocks");
  }
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    for (std::size_t b = a + 1; b < blocks.size(); ++b) {
      if (blocks[a] == blocks[b] || supports_overlap(blocks[a], blocks[b], subspaces_)) {
        throw UnsupportedError("step_block: blocks in one set must have disjoint supports");
      }
    }
  }

  StepInfo info;
  info.n = n_;
  info.w = ++w_;
  info.blocks = blocks;
  info.dual_before = dual_value();
  const StackedVector before = primal_estimate();
  // Disjoint supports make the joint subproblem separable, so the blocks are
  // solved one after another in the listed order.
  for (const BlockRef& b : blocks) {
    if (b.kind == BlockKind::Edge) {
      edge_step(b.id);
    } else if (all_v4) {
      info.node_steps.push_back(subdiff_update(b.id));
    } else {
      info.node_steps.push_back(prox_step(b.id));
    }
  }
  info.dual_after = dual_value();
  info.step_norm_sq = norm_sq(primal_estimate() - before);
  return info;
}

RunHistory Engine::run(std::size_t cycles, RunObserver* observer) {
  RunHistory history;
  history.reserve(cycles * schedule_.w_bar);
  for (std::size_t c = 0; c < cycles; ++c) {
    ++n_;
    const Cycle& cyc = schedule_.cycle(n_);
    try {
      ResetInfo reset = reset_edges(cyc.active_edges);
      if (observer) observer->on_reset(*this, reset);
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(n_, 0, e.what());
    }
    for (const BlockSet& blocks : cyc.blocks) {
      try {
        StepInfo step = step_block(blocks);
        HistoryRecord rec{n_, w_, step.dual_after, kNaN, kNaN, step.step_norm_sq};
        if (reference_) {
          rec.gap = reference_->second - step.dual_after;
          rec.dist_sq = dist_sq();
        }
        history.push_back(rec);
        if (observer) observer->on_step(*this, step, rec);
      } catch (const StepError&) {
        throw;
      } catch (const std::exception& e) {
        throw StepError(n_, w_, e.what());
      }
    }
    if (observer) observer->on_cycle_end(*this, n_);
  }
  return history;
}

void Engine::shift_minorant(std::size_t i, double delta) {
  if (!minorants_.at(i)) throw PreconditionError("shift_minorant: node " + std::to_string(i) + " has no minorant");
  minorants_[i]->intercept += delta;
  minorants_[i]->anchor_error -= delta;
  refresh_conjugate(i);
}

}  // namespace distdyk
