#include "distdyk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <variant>

#include <Eigen/Cholesky>

#include "distdyk/error.hpp"

namespace distdyk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool both_finite(double a, double b) { return std::isfinite(a) && std::isfinite(b); }

}  // namespace

ReferenceOptimum solve_all_quadratic(const Instance& instance) {
  const auto m = static_cast<Eigen::Index>(instance.dim);
  const double n = static_cast<double>(instance.num_nodes());
  Mat lhs = n * Mat::Identity(m, m);
  Vec rhs = instance.anchor.matrix().rowwise().sum();
  for (const NodeFunction& f : instance.functions) {
    if (const auto* q = std::get_if<Quadratic>(&f.kind())) {
      lhs += q->A;
      rhs -= q->b;
    } else if (!std::holds_alternative<ZeroFn>(f.kind())) {
      throw UnsupportedError("solve_all_quadratic: node function '" + std::string(f.kind_name()) +
                             "' is not quadratic");
    }
  }
  ReferenceOptimum out;
  out.x = lhs.llt().solve(rhs);
  out.primal_value = primal_value_at(instance, out.x);
  return out;
}

ReferenceOptimum reference_optimum(const Instance& instance) {
  if (instance.planted_optimum) {
    return {*instance.planted_optimum, primal_value_at(instance, *instance.planted_optimum)};
  }
  return solve_all_quadratic(instance);
}

double V4Probe::slack() const { return std::sqrt(std::max(delta_f, 0.0)) - delta_z.norm(); }

std::vector<V4Probe> probe_v4(const Engine& engine) {
  const Instance& inst = engine.instance();
  std::vector<V4Probe> out;
  for (std::size_t i = 0; i < inst.num_nodes(); ++i) {
    if (!engine.is_v4(i)) continue;
    const NodeFunction& f = inst.functions[i];
    const Vec center = inst.anchor.block(i) - engine.v_H().block(i);
    V4Probe probe;
    probe.node = i;
    probe.z_hat = prox(f, center).z;
    probe.delta_z = probe.z_hat - engine.node_dual(i);
    const Vec x = engine.primal_block(i);
    probe.delta_f = linearization_error(f, *engine.minorant(i), x);
    probe.on_slope = engine.updated(i);
    out.push_back(std::move(probe));
  }
  return out;
}

RateModel rate_model_from_string(std::string_view s) {
  if (s == "linear") return RateModel::Linear;
  if (s == "power") return RateModel::Power;
  throw PreconditionError("unknown rate model '" + std::string(s) + "' (expected linear|power)");
}

std::string_view to_string(RateModel m) { return m == RateModel::Linear ? "linear" : "power"; }

std::pair<std::size_t, std::size_t> default_window(std::size_t num_cycles) {
  return {std::max<std::size_t>(10, num_cycles / 4), num_cycles};
}

RateFit fit_rate(std::span<const double> values, RateModel model,
                 std::optional<std::pair<std::size_t, std::size_t>> window, double floor) {
  const auto [lo, hi] = window.value_or(default_window(values.size()));
  if (lo < 1 || lo > hi || hi > values.size()) {
    throw PreconditionError("fit_rate: window [" + std::to_string(lo) + "," + std::to_string(hi) +
                            "] does not fit a series of length " + std::to_string(values.size()));
  }
  std::vector<double> xs, ys;
  for (std::size_t n = lo; n <= hi; ++n) {
    const double v = values[n - 1];
    if (!std::isfinite(v) || v <= std::max(floor, 0.0)) continue;
    xs.push_back(model == RateModel::Linear ? static_cast<double>(n) : std::log(static_cast<double>(n)));
    ys.push_back(std::log(v));
  }
  if (xs.size() < 3) throw PreconditionError("fit_rate: fewer than three usable points in the window");

  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    mx += xs[j];
    my += ys[j];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    sxx += (xs[j] - mx) * (xs[j] - mx);
    sxy += (xs[j] - mx) * (ys[j] - my);
    syy += (ys[j] - my) * (ys[j] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double r = ys[j] - (intercept + slope * xs[j]);
    ss_res += r * r;
  }
  RateFit fit;
  fit.model = model;
  fit.parameter = model == RateModel::Linear ? std::exp(slope) : slope;
  // a series flat up to rounding has nothing left to explain
  const double flat = k * std::pow(16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(my)), 2);
  fit.r_squared = syy > flat ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.window_lo = lo;
  fit.window_hi = hi;
  fit.points = xs.size();
  return fit;
}

namespace {

template <class Field>
std::vector<double> cycle_end(const RunHistory& history, Field field) {
  std::vector<double> out;
  for (std::size_t j = 0; j < history.size(); ++j) {
    if (j + 1 == history.size() || history[j + 1].n != history[j].n) out.push_back(field(history[j]));
  }
  return out;
}

}  // namespace

std::vector<double> cycle_end_gaps(const RunHistory& history) {
  return cycle_end(history, [](const HistoryRecord& r) { return r.gap; });
}

std::vector<double> cycle_end_dist_sq(const RunHistory& history) {
  return cycle_end(history, [](const HistoryRecord& r) { return r.dist_sq; });
}

double gap_resolution(const RunHistory& history) {
  double scale = 1.0;
  for (const HistoryRecord& r : history) {
    if (std::isfinite(r.dual_value)) scale = std::max(scale, std::abs(r.dual_value));
    if (std::isfinite(r.dual_value + r.gap)) scale = std::max(scale, std::abs(r.dual_value + r.gap));
  }
  return 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

double beck_bound(double a1, double gamma, std::size_t k) {
  if (!(a1 > 0.0) || !(gamma > 0.0) || k < 1) throw PreconditionError("beck_bound: need a1 > 0, gamma > 0, k >= 1");
  const double a3 = a1 * a1 * a1;
  const double inv = 1.0 / a3 + static_cast<double>(k - 1) * 3.0 * gamma / (3.0 * gamma * a3 + 1.0);
  return std::pow(inv, -1.0 / 3.0);
}

BundleReport check_bundle_decrease(const NodeFunction& f, const Vec& anchor, std::size_t steps) {
  if (!f.full_domain()) throw PreconditionError("check_bundle_decrease: needs a full-domain function");
  const std::size_t m = static_cast<std::size_t>(anchor.size());
  Instance inst;
  inst.graph = Graph(1, {});
  inst.dim = m;
  inst.anchor = StackedVector::replicate(anchor, 1);
  inst.functions = {f.with_class(NodeClass::V4)};
  inst.smoothness = {curvature_bound(f)};
  SubspaceSet subspaces(inst.graph, m, {});
  const std::vector<NodeClass> classes = inst.classes();
  Schedule schedule = cyclic_schedule(subspaces, classes);
  Engine engine(inst, subspaces, schedule);

  BundleReport report;
  const ProxResult exact = prox(f, anchor);
  report.optimal_value = 0.5 * (exact.x - anchor).squaredNorm() + eval(f, exact.x);
  const double scale = 1.0 + std::abs(report.optimal_value);
  for (std::size_t k = 0; k < steps; ++k) {
    engine.subdiff_update(0);
    report.alpha.push_back(report.optimal_value - engine.dual_value());
    const Vec x = engine.primal_block(0);
    report.delta_f.push_back(linearization_error(f, *engine.minorant(0), x));
  }
  report.lipschitz = 1.1 * engine.max_subgradient_norm(0);
  report.smooth = std::holds_alternative<Quadratic>(f.kind()) || std::holds_alternative<ZeroFn>(f.kind());
  report.curvature = report.smooth ? curvature_bound(f) : 0.0;
  const double lp1 = report.curvature + 1.0;
  report.rho_bar = 2.0 * lp1 * (-1.0 + std::sqrt(1.0 + 1.0 / lp1));

  constexpr double kTol = 1e-8;
  // Alphas below this are rounding noise; their ratios carry no information.
  constexpr double kRatioFloor = 1e-10;
  report.decrease_worst_slack = kInf;
  report.ratio_worst_slack = kInf;
  const double c = 1.0 / (2.0 * (report.lipschitz + 1.0) * (report.lipschitz + 1.0));
  for (std::size_t k = 0; k + 1 < report.alpha.size(); ++k) {
    const double a = report.alpha[k];
    const double b = report.alpha[k + 1];
    const double df = std::max(report.delta_f[k], 0.0);
    // nonnegative root of c t^2 + t = df
    const double t = 2.0 * df / (1.0 + std::sqrt(1.0 + 4.0 * c * df));
    const double slack = a - 0.5 * t * t - b + kTol * scale;
    report.decrease_worst_slack = std::min(report.decrease_worst_slack, slack);
    if (slack < 0.0) report.decrease_ok = false;
    if (b > a + kTol * scale) report.nonincreasing = false;
    if (report.smooth && a > kRatioFloor) {
      const double r = b / a;
      const double ratio_slack = 1.0 + kTol - (r * r / (4.0 * lp1) + r);
      ++report.ratio_checks;
      report.ratio_worst_slack = std::min(report.ratio_worst_slack, ratio_slack);
      if (ratio_slack < 0.0) report.ratio_ok = false;
    }
  }
  return report;
}

InvariantMonitor::InvariantMonitor(std::uint64_t sample_seed, MonitorTolerances tol) : tol_(tol), rng_(sample_seed) {
  const char* names[kCount] = {"dual-ascent",     "telescoped-ascent",   "cycle-ascent", "gap-bound",
                               "weak-duality",    "dual-value-paths",    "moreau",       "stagnation",
                               "minorant-domination", "reset-neutrality", "sqrt-bound"};
  for (const char* name : names) {
    CheckResult r;
    r.name = name;
    results_.push_back(std::move(r));
  }
}

void InvariantMonitor::record(Id id, double slack, std::size_t n, std::size_t w, const std::string& what) {
  CheckResult& r = results_[id];
  ++r.checks;
  r.worst_slack = std::min(r.worst_slack, slack);
  if (slack < 0.0 || std::isnan(slack)) {
    if (r.failures++ == 0) {
      r.first_n = n;
      r.first_w = w;
      r.first_message = what;
    }
  }
}

void InvariantMonitor::snapshot(const Engine& engine) {
  last_node_duals_ = engine.node_duals();
  last_payloads_ = engine.edge_payloads();
}

void InvariantMonitor::on_reset(const Engine& engine, const ResetInfo& info) {
  double drift = 0.0;
  if (both_finite(info.dual_before, info.dual_after)) {
    drift = std::abs(info.dual_after - info.dual_before);
  } else if (info.dual_before != info.dual_after) {
    drift = kInf;
  }
  max_reset_value_drift_ = std::max(max_reset_value_drift_, drift);
  max_reset_sum_drift_ = std::max(max_reset_sum_drift_, info.sum_drift);
  record(ResetNeutrality, tol_.reset - drift, info.n, 0, "dual value changed by the reset");
  record(ResetNeutrality, tol_.reset - info.sum_drift, info.n, 0, "edge duals do not sum to v_H after the reset");
  cycle_values_.assign(1, info.dual_after);
  cycle_steps_.assign(1, 0.0);
  snapshot(engine);
}

void InvariantMonitor::on_step(const Engine& engine, const StepInfo& step, const HistoryRecord& rec) {
  const std::size_t n = step.n;
  const std::size_t w = step.w;
  const double F = step.dual_after;

  if (both_finite(step.dual_before, F)) {
    const double slack = F - step.dual_before - 0.5 * step.step_norm_sq + tol_.ascent * (1.0 + std::abs(F));
    record(Ascent, slack, n, w, "dual value rose by less than half the squared step");
  }

  cycle_values_.push_back(F);
  cycle_steps_.push_back(cycle_steps_.back() + step.step_norm_sq);
  const std::size_t w2 = cycle_values_.size() - 1;
  if (std::isfinite(F)) {
    for (std::size_t w1 = 0; w1 < w2; ++w1) {
      if (!std::isfinite(cycle_values_[w1])) continue;
      const double slack = F - cycle_values_[w1] - 0.5 * (cycle_steps_[w2] - cycle_steps_[w1]) +
                           tol_.ascent * (1.0 + std::abs(F));
      record(Telescoped, slack, n, w, "telescoped ascent from step " + std::to_string(w1) + " violated");
    }
  }

  if (engine.has_reference()) {
    if (std::isfinite(rec.gap)) {
      record(GapBound, rec.gap - rec.dist_sq + tol_.gap, n, w, "gap below 1/2||x - x*||^2");
    }
    record(WeakDuality, engine.reference_value() + tol_.gap - F, n, w, "dual value above the primal reference");
  }

  const double scratch = engine.dual_value_from_scratch();
  double paths = 0.0;
  if (both_finite(F, scratch)) {
    paths = std::abs(F - scratch);
  } else if (F != scratch) {
    paths = kInf;
  }
  record(DualPaths, tol_.dual_paths - paths, n, w, "cached and recomputed dual values disagree");

  const Instance& inst = engine.instance();
  for (const NodeStepRecord& ns : step.node_steps) {
    const double split = (ns.x_solved + ns.z - ns.center).norm();
    const double drift = (ns.x_solved - engine.primal_block(ns.node)).norm();
    record(Moreau, tol_.moreau - std::max(split, drift), n, w,
           "node " + std::to_string(ns.node) + ": primal and dual blocks do not add up to the prox centre");
    if (ns.subgradient_step) {
      const NodeFunction& f = inst.functions[ns.node];
      const AffineMinorant& minorant = *engine.minorant(ns.node);
      const Vec x = engine.primal_block(ns.node);
      const double radius = std::max(1.0, x.lpNorm<Eigen::Infinity>());
      double worst = kInf;
      for (int s = 0; s < 100; ++s) {
        Vec y(x.size());
        for (Eigen::Index k = 0; k < x.size(); ++k) y(k) = rng_.uniform(x(k) - radius, x(k) + radius);
        worst = std::min(worst, eval(f, y) + tol_.domination - minorant(y));
      }
      record(Domination, worst, n, w, "minorant of node " + std::to_string(ns.node) + " exceeds f");
    }
  }

  // Blocks outside the step must be bitwise unchanged.
  bool still = true;
  auto listed = [&](BlockKind kind, std::size_t id) {
    return std::find(step.blocks.begin(), step.blocks.end(), BlockRef{kind, id}) != step.blocks.end();
  };
  for (std::size_t i = 0; i < last_node_duals_.size(); ++i) {
    if (!listed(BlockKind::Node, i) && !(engine.node_dual(i).array() == last_node_duals_[i].array()).all()) {
      still = false;
    }
  }
  for (std::size_t id = 0; id < last_payloads_.size(); ++id) {
    if (!listed(BlockKind::Edge, id) && !(engine.edge_payload(id).array() == last_payloads_[id].array()).all()) {
      still = false;
    }
  }
  record(Stagnation, still ? 0.0 : -1.0, n, w, "a block outside the step changed");
  snapshot(engine);
}

void InvariantMonitor::on_cycle_end(const Engine& engine, std::size_t n) {
  const double F = cycle_values_.back();
  if (last_cycle_end_ && both_finite(*last_cycle_end_, F)) {
    record(CycleAscent, F - *last_cycle_end_ + tol_.ascent * (1.0 + std::abs(F)), n, engine.inner(),
           "dual value fell across cycles");
  }
  last_cycle_end_ = F;
  for (const V4Probe& p : probe_v4(engine)) {
    if (!p.on_slope) continue;
    record(SqrtBound, p.delta_f + 1e-12, n, engine.inner(), "negative linearisation error at node " + std::to_string(p.node));
    record(SqrtBound, p.slack() + tol_.sqrt_bound, n, engine.inner(),
           "node " + std::to_string(p.node) + ": ||dz|| exceeds sqrt(df)");
  }
}

const CheckResult& InvariantMonitor::result(std::string_view name) const {
  for (const CheckResult& r : results_) {
    if (r.name == name) return r;
  }
  throw PreconditionError("InvariantMonitor: unknown check '" + std::string(name) + "'");
}

bool InvariantMonitor::all_passed() const {
  return std::all_of(results_.begin(), results_.end(), [](const CheckResult& r) { return r.passed(); });
}

const CheckResult* InvariantMonitor::first_failure() const {
  const CheckResult* first = nullptr;
  for (const CheckResult& r : results_) {
    if (r.passed()) continue;
    if (!first || std::pair(*r.first_n, *r.first_w) < std::pair(*first->first_n, *first->first_w)) first = &r;
  }
  return first;
}

}  // namespace distdyk
