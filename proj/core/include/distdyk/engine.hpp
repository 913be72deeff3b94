#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "distdyk/funcs.hpp"
#include "distdyk/instances.hpp"
#include "distdyk/schedule.hpp"
#include "distdyk/stacked_vector.hpp"
#include "distdyk/topology.hpp"

namespace distdyk {

struct HistoryRecord {
  std::size_t n = 0;
  std::size_t w = 0;
  double dual_value = 0.0;    // -inf while some V4 dual is off its minorant slope
  double gap = 0.0;           // NaN without a reference optimum
  double dist_sq = 0.0;       // 1/2 ||x - x*||^2, NaN without a reference optimum
  double step_norm_sq = 0.0;  // ||x^{n,w} - x^{n,w-1}||^2
};

using RunHistory = std::vector<HistoryRecord>;

/// What a node step solved, kept for consistency checks.
struct NodeStepRecord {
  std::size_t node = 0;
  Vec center;    // p_i = [anchor - v_H]_i
  Vec x_solved;  // primal point returned by the block solver
  Vec z;         // new node dual
  bool subgradient_step = false;
};

struct StepInfo {
  std::size_t n = 0;
  std::size_t w = 0;
  BlockSet blocks;
  double dual_before = 0.0;
  double dual_after = 0.0;
  double step_norm_sq = 0.0;
  std::vector<NodeStepRecord> node_steps;
};

struct ResetInfo {
  std::size_t n = 0;
  double dual_before = 0.0;
  double dual_after = 0.0;
  double sum_drift = 0.0;  // ||sum of new edge duals - v_H||_inf
  double max_component_norm = 0.0;
};

class Engine;

/// Hooks called by Engine::run. Default implementations do nothing.
class RunObserver {
 public:
  virtual ~RunObserver() = default;
  virtual void on_reset(const Engine&, const ResetInfo&) {}
  virtual void on_step(const Engine&, const StepInfo&, const HistoryRecord&) {}
  virtual void on_cycle_end(const Engine&, std::size_t /*n*/) {}
};

/// Dual block-coordinate ascent on a consensus instance.
///
/// Node duals are stored as their own block only; an edge dual is a payload t
/// placed as +t on the edge's first endpoint and -t on the second. The primal
/// estimate is x = anchor - v_H - (node duals).
class Engine {
 public:
  /// Throws PreconditionError if the schedule has structural errors or does
  /// not match the instance. Warnings are kept in findings().
  Engine(Instance instance, SubspaceSet subspaces, Schedule schedule);

  /// Sets node duals (default zero) and v_H (default zero, must lie in D-perp),
  /// then linearises every V4 function at its current primal block.
  void init(std::optional<std::vector<Vec>> node_duals = std::nullopt,
            std::optional<StackedVector> v_H = std::nullopt);

  /// Redistributes v_H over the active subspaces; inactive payloads become zero.
  ResetInfo reset_edges(std::span<const std::size_t> active);

  /// One block step. Throws UnsupportedError for mixed V4 / other blocks or
  /// overlapping supports.
  StepInfo step_block(const BlockSet& blocks);

  /// One cutting-plane update of a V4 node.
  NodeStepRecord subdiff_update(std::size_t i);

  /// Dual value from cached v_H and conjugate values.
  double dual_value() const;
  /// Dual value recomputed from the edge payloads, node duals, witnesses and minorants.
  double dual_value_from_scratch() const;

  StackedVector primal_estimate() const;
  Vec primal_block(std::size_t i) const;

  void set_reference(Vec x_star, double primal_value);
  bool has_reference() const noexcept { return reference_.has_value(); }
  const Vec& reference_point() const;
  double reference_value() const;
  /// reference value - dual value; NaN without a reference.
  double duality_gap() const;
  /// 1/2 ||x - x*||^2; NaN without a reference.
  double dist_sq() const;

  /// Runs `cycles` further cycles; failures are rethrown as StepError.
  RunHistory run(std::size_t cycles, RunObserver* observer = nullptr);

  /// Raises the intercept of a V4 minorant by `delta` (fault injection for checkers).
  void shift_minorant(std::size_t i, double delta);

  const Instance& instance() const noexcept { return instance_; }
  const SubspaceSet& subspaces() const noexcept { return subspaces_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  const std::vector<Finding>& findings() const noexcept { return findings_; }

  std::size_t cycle() const noexcept { return n_; }
  std::size_t inner() const noexcept { return w_; }

  const Vec& node_dual(std::size_t i) const { return node_duals_.at(i); }
  const std::vector<Vec>& node_duals() const noexcept { return node_duals_; }
  const Vec& edge_payload(std::size_t id) const { return payloads_.at(id); }
  const std::vector<Vec>& edge_payloads() const noexcept { return payloads_; }
  const StackedVector& v_H() const noexcept { return v_H_; }

  bool is_v4(std::size_t i) const { return instance_.functions.at(i).node_class() == NodeClass::V4; }
  const std::optional<AffineMinorant>& minorant(std::size_t i) const { return minorants_.at(i); }
  bool updated(std::size_t i) const { return updated_.at(i); }
  /// Largest subgradient norm seen at node i's linearisation points.
  double max_subgradient_norm(std::size_t i) const { return max_subgradient_norm_.at(i); }

 private:
  double node_conjugate(std::size_t i) const;
  void refresh_conjugate(std::size_t i);
  NodeStepRecord prox_step(std::size_t i);
  void edge_step(std::size_t id);
  double assemble_dual(const StackedVector& x, double conjugate_sum) const;

  Instance instance_;
  SubspaceSet subspaces_;
  Schedule schedule_;
  std::vector<Finding> findings_;

  std::vector<Vec> node_duals_;
  std::vector<Vec> payloads_;
  StackedVector v_H_;
  std::vector<std::optional<AffineMinorant>> minorants_;
  std::vector<bool> updated_;
  std::vector<std::optional<Vec>> witnesses_;  // non-V4 nodes
  std::vector<double> conjugates_;             // cached node conjugate values
  std::vector<double> max_subgradient_norm_;
  double anchor_norm_sq_ = 0.0;

  std::optional<std::pair<Vec, double>> reference_;
  std::size_t n_ = 0;
  std::size_t w_ = 0;
  bool initialised_ = false;
};

}  // namespace distdyk
