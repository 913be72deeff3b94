#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distdyk/engine.hpp"
#include "distdyk/funcs.hpp"
#include "distdyk/instances.hpp"
#include "distdyk/rng.hpp"

namespace distdyk {

struct ReferenceOptimum {
  Vec x;
  double primal_value = 0.0;
};

/// Planted optimum when the instance has one, otherwise the closed-form
/// solution of an all-quadratic instance. Throws UnsupportedError otherwise.
ReferenceOptimum reference_optimum(const Instance& instance);

/// Minimiser of sum_i 1/2||x - anchor_i||^2 + f_i(x) when every f_i is
/// quadratic or zero: (|V| I + sum A_i) x = sum (anchor_i - b_i).
ReferenceOptimum solve_all_quadratic(const Instance& instance);

struct V4Probe {
  std::size_t node = 0;
  Vec z_hat;             // dual of the exact prox at the node's current centre
  Vec delta_z;           // z_hat - z_i
  double delta_f = 0.0;  // f_i(x_i) - minorant(x_i)
  bool on_slope = false; // z_i equals the minorant slope (node updated at least once)
  /// sqrt(delta_f) - ||delta_z||; nonnegative whenever on_slope.
  double slack() const;
};

/// Exact-prox probe of every V4 node.
std::vector<V4Probe> probe_v4(const Engine& engine);

enum class RateModel { Linear, Power };
RateModel rate_model_from_string(std::string_view s);
std::string_view to_string(RateModel m);

struct RateFit {
  RateModel model = RateModel::Linear;
  double parameter = 0.0;  // per-cycle ratio (linear) or exponent (power)
  double r_squared = 0.0;
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  std::size_t points = 0;
};

/// Default tail window [max(10, N/4), N].
std::pair<std::size_t, std::size_t> default_window(std::size_t num_cycles);

/// Least-squares fit of log(values[n-1]) against n (linear) or log n (power)
/// over n in [lo, hi]. Non-finite values and values <= floor are skipped; fewer
/// than three usable points is a PreconditionError.
RateFit fit_rate(std::span<const double> values, RateModel model,
                 std::optional<std::pair<std::size_t, std::size_t>> window = std::nullopt, double floor = 0.0);

/// Smallest gap distinguishable from rounding in the dual value:
/// 64 eps max(1, |F|, |F + gap|) over the finite records. Gaps below it are
/// numerically zero and carry no rate information.
double gap_resolution(const RunHistory& history);

/// Value of the last record of every cycle, indexed by n - 1.
std::vector<double> cycle_end_gaps(const RunHistory& history);
std::vector<double> cycle_end_dist_sq(const RunHistory& history);

/// Upper bound on a_k for a nonnegative sequence with a_k >= a_{k+1} + gamma a_{k+1}^4.
double beck_bound(double a1, double gamma, std::size_t k);

struct BundleReport {
  std::vector<double> alpha;    // alpha_k after update k, k = 1..steps
  std::vector<double> delta_f;  // f(x_k) - f_k(x_k) after update k
  double optimal_value = 0.0;
  double lipschitz = 0.0;       // 1.1 x largest visited subgradient norm
  double curvature = 0.0;       // gradient Lipschitz modulus; 0 when not smooth
  bool smooth = false;
  double rho_bar = 0.0;         // largest ratio allowed by the smooth bound
  double decrease_worst_slack = 0.0;
  bool decrease_ok = true;
  double ratio_worst_slack = 0.0;
  bool ratio_ok = true;
  std::size_t ratio_checks = 0;
  bool nonincreasing = true;
};

/// Runs repeated cutting-plane updates for min f(x) + 1/2||x - anchor||^2 on a
/// single node and checks the per-step dual decrease bounds.
BundleReport check_bundle_decrease(const NodeFunction& f, const Vec& anchor, std::size_t steps);

/// Tolerances checked by InvariantMonitor.
struct MonitorTolerances {
  double ascent = 1e-8;        // relative to 1 + |F|
  double gap = 1e-9;
  double dual_paths = 1e-9;
  double moreau = 1e-10;
  double domination = 1e-9;
  double reset = 1e-9;
  double sqrt_bound = 1e-8;
};

struct CheckResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> first_n;
  std::optional<std::size_t> first_w;
  std::string first_message;

  bool passed() const noexcept { return failures == 0; }
};

/// Runtime invariant checks, attached to Engine::run as an observer.
class InvariantMonitor : public RunObserver {
 public:
  explicit InvariantMonitor(std::uint64_t sample_seed = 0, MonitorTolerances tol = {});

  void on_reset(const Engine& engine, const ResetInfo& info) override;
  void on_step(const Engine& engine, const StepInfo& step, const HistoryRecord& rec) override;
  void on_cycle_end(const Engine& engine, std::size_t n) override;

  const std::vector<CheckResult>& results() const noexcept { return results_; }
  const CheckResult& result(std::string_view name) const;
  bool all_passed() const;
  /// The failing check whose first failure came earliest in (n, w).
  const CheckResult* first_failure() const;

  double max_reset_value_drift() const noexcept { return max_reset_value_drift_; }
  double max_reset_sum_drift() const noexcept { return max_reset_sum_drift_; }

 private:
  enum Id { Ascent, Telescoped, CycleAscent, GapBound, WeakDuality, DualPaths, Moreau, Stagnation,
            Domination, ResetNeutrality, SqrtBound, kCount };
  void record(Id id, double slack, std::size_t n, std::size_t w, const std::string& what);
  void snapshot(const Engine& engine);

  MonitorTolerances tol_;
  Rng rng_;
  std::vector<CheckResult> results_;
  std::vector<double> cycle_values_;  // F^{n,0..w}
  std::vector<double> cycle_steps_;   // prefix sums of step norms
  std::optional<double> last_cycle_end_;
  std::vector<Vec> last_node_duals_;
  std::vector<Vec> last_payloads_;
  double max_reset_value_drift_ = 0.0;
  double max_reset_sum_drift_ = 0.0;
};

}  // namespace distdyk
