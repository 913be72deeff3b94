// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <Eigen/Cholesky>

#include "distdyk/analysis.hpp"
#include "distdyk/engine.hpp"
#include "distdyk/funcs.hpp"
#include "distdyk/instances.hpp"
#include "distdyk/io.hpp"
#include "distdyk/rng.hpp"
#include "distdyk/schedule.hpp"
#include "distdyk_cli/cli.hpp"

using namespace distdyk;

namespace {

constexpr std::size_t kSeeds = 20;
constexpr std::size_t kCycles = 200;
constexpr std::size_t kNodes = 5;
constexpr std::size_t kDim = 4;

struct Run {
  Family family;
  Treatment treatment;
  std::uint64_t seed;
  RunHistory history;
  InvariantMonitor monitor;
  double seconds = 0.0;
  std::string error;

  std::string label() const {
    std::ostringstream ss;
    ss << (family == Family::Smooth ? "smooth" : "nonsmooth") << "/"
       << (treatment == Treatment::Subdiff ? "subdiff" : "prox") << "/seed" << seed;
    return ss.str();
  }
};

Run experiment(Family family, Treatment treatment, std::uint64_t seed) {
  Run r{family, treatment, seed, {}, InvariantMonitor(seed), 0.0, {}};
  try {
    const auto start = std::chrono::steady_clock::now();
    Instance inst = with_treatment(generate(family, seed, kNodes, kDim, GraphShape::Star), treatment);
    SubspaceSet subspaces = SubspaceSet::full_edges(inst.graph, inst.dim);
    Schedule schedule = star_schedule(subspaces);
    const ReferenceOptimum ref = reference_optimum(inst);
    Engine engine(std::move(inst), std::move(subspaces), std::move(schedule));
    engine.set_reference(ref.x, ref.primal_value);
    r.history = engine.run(kCycles, &r.monitor);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

std::string sci(double v, int digits = 3) {
  std::ostringstream ss;
  ss << std::setprecision(digits) << std::scientific << v;
  return ss.str();
}

bool report(int id, bool pass, const std::string& title, const std::string& detail) {
  std::cout << "criterion " << std::setw(2) << id << ": " << (pass ? "PASS" : "FAIL") << "  " << title;
  if (!detail.empty()) std::cout << "\n    " << detail;
  std::cout << std::endl;
  return pass;
}

/// Collects per-run failures for one criterion and keeps the first few messages.
struct Tally {
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::vector<std::string> notes;

  void add(bool ok, const std::string& note) {
    ++runs;
    if (ok) return;
    ++failed;
    if (notes.size() < 6) notes.push_back(note);
  }
  bool ok() const { return failed == 0; }
  std::string summary(const std::string& extra = "") const {
    std::ostringstream ss;
    ss << failed << "/" << runs << " runs failed" << extra;
    for (const std::string& n : notes) ss << "\n    " << n;
    return ss.str();
  }
};

const CheckResult& check(const Run& r, const char* name) { return r.monitor.result(name); }

// ---- criteria on the seeded star experiments ------------------------------

bool criterion_ascent(const std::vector<Run>& runs) {
  Tally t;
  double slowest = 0.0;
  for (const Run& r : runs) {
    slowest = std::max(slowest, r.seconds);
    if (!r.error.empty()) {
      t.add(false, r.label() + ": " + r.error);
      continue;
    }
    const CheckResult& a = check(r, "dual-ascent");
    const CheckResult& b = check(r, "telescoped-ascent");
    const bool ok = a.passed() && b.passed() && a.checks > 0 && b.checks > 0 && r.seconds < 1.0;
    t.add(ok, r.label() + ": ascent failures " + std::to_string(a.failures) + ", telescoped failures " +
                  std::to_string(b.failures) + ", time " + sci(r.seconds) + " s");
  }
  return report(1, t.ok(), "dual ascent per step and telescoped within cycles, < 1 s per run",
                t.summary(", slowest run " + sci(slowest) + " s"));
}

bool criterion_gap_bound(const std::vector<Run>& runs) {
  Tally t;
  double worst = std::numeric_limits<double>::infinity();
  for (const Run& r : runs) {
    if (!r.error.empty()) {
      t.add(false, r.label() + ": " + r.error);
      continue;
    }
    const CheckResult& c = check(r, "gap-bound");
    worst = std::min(worst, c.worst_slack);
    // an infinite gap (some V4 dual not yet on its minorant) satisfies the bound trivially
    const auto finite = std::count_if(r.history.begin(), r.history.end(),
                                      [](const HistoryRecord& h) { return std::isfinite(h.gap); });
    t.add(c.passed() && c.checks == static_cast<std::size_t>(finite) && finite > 0,
          r.label() + ": " + std::to_string(c.failures) + " failures, first " + c.first_message);
  }
  return report(2, t.ok(), "gap >= 1/2||x - x*||^2 - 1e-9 at every recorded step",
                t.summary(", worst slack " + sci(worst)));
}

bool criterion_smooth_linear(const std::vector<Run>& runs) {
  Tally t;
  double worst_rho = 0.0, worst_r2 = 1.0, worst_final = 0.0;
  for (const Run& r : runs) {
    if (r.family != Family::Smooth) continue;
    if (!r.error.empty()) {
      t.add(false, r.label() + ": " + r.error);
      continue;
    }
    const std::vector<double> gaps = cycle_end_gaps(r.history);
    const double final_gap = gaps.back();
    worst_final = std::max(worst_final, final_gap);
    try {
      const RateFit fit = fit_rate(gaps, RateModel::Linear, std::pair<std::size_t, std::size_t>{50, 200},
                                   gap_resolution(r.history));
      worst_rho = std::max(worst_rho, fit.parameter);
      worst_r2 = std::min(worst_r2, fit.r_squared);
      const bool ok = fit.parameter < 1.0 && fit.r_squared > 0.99 && final_gap < 1e-6;
      t.add(ok, r.label() + ": rho " + sci(fit.parameter, 5) + ", r2 " + sci(fit.r_squared, 5) + " over " +
                    std::to_string(fit.points) + " points, final gap " + sci(final_gap));
    } catch (const std::exception& e) {
      t.add(false, r.label() + ": " + e.what());
    }
  }
  return report(3, t.ok(), "smooth family, both treatments: linear tail fit rho < 1, r2 > 0.99; final gap < 1e-6",
                t.summary(", worst rho " + sci(worst_rho, 5) + ", worst r2 " + sci(worst_r2, 5) + ", worst final gap " +
                          sci(worst_final)));
}

bool criterion_prox_nonsmooth(const std::vector<Run>& runs) {
  Tally t;
  double worst_rho = 0.0, worst_r2 = 1.0, worst_ratio = 0.0;
  for (const Run& r : runs) {
    if (r.family != Family::Nonsmooth || r.treatment != Treatment::Prox) continue;
    if (!r.error.empty()) {
      t.add(false, r.label() + ": " + r.error);
      continue;
    }
    const std::vector<double> gaps = cycle_end_gaps(r.history);
    try {
      const RateFit fit = fit_rate(gaps, RateModel::Linear, std::pair<std::size_t, std::size_t>{50, 200},
                                   gap_resolution(r.history));
      const double base = 50.0 * gaps[49];
      double tail = -std::numeric_limits<double>::infinity();
      for (std::size_t n = 50; n <= kCycles; ++n) tail = std::max(tail, static_cast<double>(n) * gaps[n - 1]);
      const double ratio = tail / base;
      worst_rho = std::max(worst_rho, fit.parameter);
      worst_r2 = std::min(worst_r2, fit.r_squared);
      worst_ratio = std::max(worst_ratio, ratio);
      const bool ok = fit.parameter < 1.0 && fit.r_squared > 0.98 && base > 0.0 && tail <= 2.0 * base;
      t.add(ok, r.label() + ": rho " + sci(fit.parameter, 5) + ", r2 " + sci(fit.r_squared, 5) +
                    ", max n*gap / (50*gap_50) " + sci(ratio));
    } catch (const std::exception& e) {
      t.add(false, r.label() + ": " + e.what());
    }
  }
  return report(4, t.ok(),
                "nonsmooth family as proximable: linear fit rho < 1, r2 > 0.98 over [50,200]; n*gap bounded by 2x",
                t.summary(", worst rho " + sci(worst_rho, 5) + ", worst r2 " + sci(worst_r2, 5) +
                          ", worst n*gap ratio " + sci(worst_ratio)));
}

bool criterion_subdiff_nonsmooth(const std::vector<Run>& runs) {
  Tally t;
  Tally soft;
  double lo_gap = 0.0, hi_gap = -10.0, lo_dist = 0.0, hi_dist = -10.0;
  for (const Run& r : runs) {
    if (r.family != Family::Nonsmooth || r.treatment != Treatment::Subdiff) continue;
    if (!r.error.empty()) {
      t.add(false, r.label() + ": " + r.error);
      continue;
    }
    try {
      const RateFit g = fit_rate(cycle_end_gaps(r.history), RateModel::Power);
      lo_gap = std::min(lo_gap, g.parameter);
      hi_gap = std::max(hi_gap, g.parameter);
      const bool ok = g.parameter <= -1.0 / 3.0 && g.parameter >= -1.4 && g.parameter <= -0.7;
      t.add(ok, r.label() + ": gap exponent " + sci(g.parameter, 4));
    } catch (const std::exception& e) {
      t.add(false, r.label() + ": " + e.what());
    }
    try {
      const RateFit d = fit_rate(cycle_end_dist_sq(r.history), RateModel::Power);
      lo_dist = std::min(lo_dist, d.parameter);
      hi_dist = std::max(hi_dist, d.parameter);
      soft.add(d.parameter >= -2.6 && d.parameter <= -1.4, r.label() + ": dist_sq exponent " + sci(d.parameter, 4));
    } catch (const std::exception& e) {
      soft.add(false, r.label() + ": " + e.what());
    }
  }
  std::ostringstream extra;
  extra << ", gap exponents in [" << sci(lo_gap, 4) << ", " << sci(hi_gap, 4) << "]";
  const bool pass = report(5, t.ok(), "nonsmooth family as V4: gap power exponent <= -1/3 and within [-1.4, -0.7]",
                           t.summary(extra.str()));
  std::cout << "    dist_sq exponents in [" << sci(lo_dist, 4) << ", " << sci(hi_dist, 4) << "], band [-2.6, -1.4]: "
            << (soft.ok() ? "ok" : "WARN (soft band, not a failure)");
  if (!soft.ok()) std::cout << " " << soft.summary();
  std::cout << std::endl;
  return pass;
}

bool criterion_sqrt_bound(const std::vector<Run>& runs) {
  Tally t;
  double worst = std::numeric_limits<double>::infinity();
  std::size_t checks = 0;
  for (const Run& r : runs) {
    if (r.treatment != Treatment::Subdiff) continue;
    if (!r.error.empty()) {
      t.add(false, r.label() + ": " + r.error);
      continue;
    }
    const CheckResult& c = check(r, "sqrt-bound");
    worst = std::min(worst, c.worst_slack);
    checks += c.checks;
    // two records per probe: nonnegative linearisation error, then the bound itself
    t.add(c.passed() && c.checks == 2 * kCycles * kNodes,
          r.label() + ": " + std::to_string(c.failures) + " failures, first " + c.first_message);
  }
  return report(6, t.ok(), "||dz_i|| <= sqrt(df_i) + 1e-8 at every cycle end for every V4 node",
                t.summary(", " + std::to_string(checks) + " probes, worst slack " + sci(worst)));
}

// ---- single-node cutting-plane harness -------------------------------------

bool criterion_bundle() {
  struct Case {
    std::string name;
    NodeFunction f;
    Vec anchor;
    bool expect_ratio;
  };
  std::vector<Case> cases;
  const auto vec = [](std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v(k++) = x;
    return v;
  };
  const NodeFunction abs1(AffinePair{vec({1.0}), 0.0, vec({-1.0}), 0.0}, NodeClass::V4);
  cases.push_back({"|x| at 3", abs1, vec({3.0}), false});
  cases.push_back({"|x| at 0.5", abs1, vec({0.5}), false});
  cases.push_back({"|x| at -0.9", abs1, vec({-0.9}), false});
  cases.push_back({"|x| as max of quadratics at 0.5",
                   NodeFunction(MaxTwoQuadratics{Mat::Zero(1, 1), vec({1.0}), 0.0, vec({-1.0}), 0.0}, NodeClass::V4),
                   vec({0.5}), false});
  cases.push_back({"|a.x| in R^4",
                   NodeFunction(AffinePair{vec({1.0, -2.0, 0.5, 1.0}), 0.0, vec({-1.0, 2.0, -0.5, -1.0}), 0.0},
                                NodeClass::V4),
                   vec({0.3, 0.1, -0.2, 0.4}), false});
  Rng rng(7);
  for (int j = 0; j < 3; ++j) {
    const Vec v = Vec::NullaryExpr(4, [&] { return rng.uniform(); });
    const Mat A = v * v.transpose() + rng.uniform() * Mat::Identity(4, 4);
    const Vec b = Vec::NullaryExpr(4, [&] { return rng.uniform(-1.0, 1.0); });
    const Vec p = Vec::NullaryExpr(4, [&] { return rng.uniform(-2.0, 2.0); });
    cases.push_back({"random quadratic " + std::to_string(j), NodeFunction(Quadratic{A, b, 0.3}, NodeClass::V4), p, true});
  }
  cases.push_back({"1-d quadratic", NodeFunction(Quadratic{Mat::Constant(1, 1, 2.0), vec({-1.0}), 0.0}, NodeClass::V4),
                   vec({4.0}), true});

  Tally t;
  for (const Case& c : cases) {
    try {
      const BundleReport r = check_bundle_decrease(c.f, c.anchor, 100);
      const bool ok = r.alpha.size() == 100 && r.decrease_ok && r.ratio_ok && r.nonincreasing &&
                      (!c.expect_ratio || r.smooth);
      t.add(ok, c.name + ": decrease slack " + sci(r.decrease_worst_slack) + ", ratio slack " +
                    sci(r.ratio_worst_slack) + " (" + std::to_string(r.ratio_checks) + " checks)");
    } catch (const std::exception& e) {
      t.add(false, c.name + ": " + e.what());
    }
  }
  return report(7, t.ok(), "single-node |x|-type and quadratic cutting-plane runs satisfy both decrease bounds, 100 steps",
                t.summary());
}

// ---- Beck-type recurrence ---------------------------------------------------

double next_term(double a, double gamma) {
  // positive root of s + gamma s^4 = a, by bisection
  double lo = 0.0, hi = a;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    (mid + gamma * mid * mid * mid * mid > a ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

bool criterion_recurrence() {
  Rng rng(11);
  Tally t;
  double worst = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 10; ++j) {
    const double a1 = rng.uniform(0.05, 3.0);
    const double gamma = rng.uniform(0.01, 3.0);
    double a = a1;
    bool ok = true;
    std::size_t bad_k = 0;
    for (std::size_t k = 1; k <= 10000; ++k) {
      const double slack = beck_bound(a1, gamma, k) + 1e-10 - a;
      worst = std::min(worst, slack);
      if (slack < 0.0 && ok) {
        ok = false;
        bad_k = k;
      }
      a = next_term(a, gamma);
    }
    t.add(ok, "a1 " + sci(a1) + ", gamma " + sci(gamma) + ": exceeded at k = " + std::to_string(bad_k));
  }
  return report(8, t.ok(), "equality-recurrence sequences stay below beck_bound + 1e-10 for k <= 10^4",
                t.summary(", worst slack " + sci(worst)));
}

// ---- oracle equivalences ------------------------------------------------------

constexpr std::size_t kGrid = 1000000;

/// argmax over a uniform theta grid of a concave dual in theta.
template <class Dual>
double grid_argmax(Dual dual) {
  double best = -std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (std::size_t k = 0; k <= kGrid; ++k) {
    const double th = static_cast<double>(k) / static_cast<double>(kGrid);
    const double v = dual(th);
    if (v > best) {
      best = v;
      arg = th;
    }
  }
  return arg;
}

bool criterion_oracles() {
  Rng rng(13);
  double worst_affine = 0.0, worst_quad = 0.0, worst_engine = 0.0;
  std::vector<std::string> notes;
  for (int j = 0; j < 10; ++j) {
    const Eigen::Index m = 2;
    const Vec a1 = Vec::NullaryExpr(m, [&] { return rng.uniform(-0.5, 0.5); });
    const Vec a2 = Vec::NullaryExpr(m, [&] { return rng.uniform(-0.5, 0.5); });
    const double b1 = rng.uniform(-1.0, 1.0), b2 = rng.uniform(-1.0, 1.0);
    const Vec p = Vec::NullaryExpr(m, [&] { return rng.uniform(-2.0, 2.0); });
    const AffinePairProx r = prox_max_two_affine(a1, b1, a2, b2, p);
    // dual of the prox in the multiplier: max_theta -1/2||z||^2 + z.p + theta b1 + (1 - theta) b2
    const double th = grid_argmax([&](double t) {
      const Vec z = t * a1 + (1.0 - t) * a2;
      return -0.5 * z.squaredNorm() + z.dot(p) + t * b1 + (1.0 - t) * b2;
    });
    const Vec x_grid = p - (th * a1 + (1.0 - th) * a2);
    worst_affine = std::max(worst_affine, (r.result.x - x_grid).lpNorm<Eigen::Infinity>());
  }
  for (int j = 0; j < 5; ++j) {
    const Eigen::Index m = 3;
    const Vec v = Vec::NullaryExpr(m, [&] { return rng.uniform(); });
    const Mat A = v * v.transpose() + rng.uniform() * Mat::Identity(m, m);
    const Vec b1 = Vec::NullaryExpr(m, [&] { return rng.uniform(-0.5, 0.5); });
    const Vec b2 = Vec::NullaryExpr(m, [&] { return rng.uniform(-0.5, 0.5); });
    const double c1 = rng.uniform(-1.0, 1.0), c2 = rng.uniform(-1.0, 1.0);
    const Vec p = Vec::NullaryExpr(m, [&] { return rng.uniform(-2.0, 2.0); });
    const NodeFunction f(MaxTwoQuadratics{A, b1, c1, b2, c2}, NodeClass::V1);
    const ProxResult r = prox(f, p);
    const Eigen::LLT<Mat> llt(Mat::Identity(m, m) + A);
    const auto x_of = [&](double t) -> Vec { return llt.solve(p - t * b1 - (1.0 - t) * b2); };
    const double th = grid_argmax([&](double t) {
      const Vec x = x_of(t);
      return 0.5 * (x - p).squaredNorm() + 0.5 * x.dot(A * x) + (t * b1 + (1.0 - t) * b2).dot(x) + t * c1 +
             (1.0 - t) * c2;
    });
    worst_quad = std::max(worst_quad, (r.x - x_of(th)).lpNorm<Eigen::Infinity>());
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (Treatment treatment : {Treatment::Prox, Treatment::Subdiff}) {
      for (GraphShape shape : {GraphShape::Star, GraphShape::Ring}) {
        Instance inst = with_treatment(gen_smooth(seed, kNodes, kDim, shape), treatment);
        const ReferenceOptimum closed = solve_all_quadratic(inst);
        SubspaceSet subspaces = SubspaceSet::full_edges(inst.graph, inst.dim);
        Schedule schedule = shape == GraphShape::Star
                                ? star_schedule(subspaces)
                                : cyclic_schedule(subspaces, inst.classes(), CyclicOrder::Interleaved);
        Engine engine(std::move(inst), std::move(subspaces), std::move(schedule));
        engine.run(2000);
        const StackedVector x = engine.primal_estimate();
        double err = 0.0;
        for (std::size_t i = 0; i < x.num_blocks(); ++i) {
          err = std::max(err, (x.block(i) - closed.x).lpNorm<Eigen::Infinity>());
        }
        worst_engine = std::max(worst_engine, err);
      }
    }
  }
  const bool ok = worst_affine <= 1e-6 && worst_quad <= 1e-6 && worst_engine <= 1e-6;
  return report(9, ok, "oracle equivalences within 1e-6",
                "two-affine prox vs theta grid " + sci(worst_affine) + ", max-of-quadratics prox vs multiplier grid " +
                    sci(worst_quad) + ", engine after 2000 cycles vs closed form " + sci(worst_engine));
}

// ---- reset on time-varying graphs ---------------------------------------------

bool criterion_reset() {
  Tally t;
  double worst_sum = 0.0, worst_value = 0.0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    for (Family family : {Family::Smooth, Family::Nonsmooth}) {
      for (Treatment treatment : {Treatment::Prox, Treatment::Subdiff}) {
        const std::string label = std::string(family == Family::Smooth ? "smooth" : "nonsmooth") + "/" +
                                  (treatment == Treatment::Prox ? "prox" : "subdiff") + "/seed" + std::to_string(seed);
        try {
          Instance inst = with_treatment(generate(family, seed, 6, kDim, GraphShape::Ring), treatment);
          SubspaceSet subspaces = SubspaceSet::full_edges(inst.graph, inst.dim);
          Schedule schedule = time_varying_schedule(subspaces, inst.classes(), seed, 0.3, 100);
          const ReferenceOptimum ref = reference_optimum(inst);
          Engine engine(std::move(inst), std::move(subspaces), std::move(schedule));
          engine.set_reference(ref.x, ref.primal_value);
          InvariantMonitor monitor(seed);
          engine.run(100, &monitor);
          const CheckResult& c = monitor.result("reset-neutrality");
          worst_sum = std::max(worst_sum, monitor.max_reset_sum_drift());
          worst_value = std::max(worst_value, monitor.max_reset_value_drift());
          const bool ok = c.passed() && c.checks >= 100 && monitor.max_reset_sum_drift() <= 1e-9 &&
                          monitor.max_reset_value_drift() <= 1e-9;
          t.add(ok, label + ": sum drift " + sci(monitor.max_reset_sum_drift()) + ", value drift " +
                        sci(monitor.max_reset_value_drift()));
        } catch (const std::exception& e) {
          t.add(false, label + ": " + e.what());
        }
      }
    }
  }
  return report(10, t.ok(), "reset on time-varying ring schedules: sum of edge duals = v_H and dual value kept, 100 cycles",
                t.summary(", worst sum drift " + sci(worst_sum) + ", worst value drift " + sci(worst_value)));
}

// ---- determinism --------------------------------------------------------------

bool criterion_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("distdyk_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;
  for (const char* family : {"smooth", "nonsmooth"}) {
    for (const char* treat : {"prox", "subdiff"}) {
      std::vector<std::string> instances, csvs;
      for (int pass = 0; pass < 2; ++pass) {
        const std::string tag = std::string(family) + "_" + treat + "_" + std::to_string(pass);
        const fs::path inst = dir / (tag + ".json");
        const fs::path csv = dir / (tag + ".csv");
        std::ostringstream out, err;
        int code = cli::run_cli({"gen", "--family", family, "--seed", "3", "--out", inst.string()}, out, err);
        code = std::max(code, cli::run_cli({"run", "--instance", inst.string(), "--treat", treat, "--cycles",
                                                    "50", "--csv", csv.string()},
                                                   out, err));
        if (code != 0) {
          ok = false;
          detail += std::string(family) + "/" + treat + ": cli exit " + std::to_string(code) + " " + err.str() + "; ";
        }
        instances.push_back(read_file(inst));
        csvs.push_back(read_file(csv));
      }
      if (instances[0] != instances[1] || csvs[0] != csvs[1] || csvs[0].empty()) {
        ok = false;
        detail += std::string(family) + "/" + treat + ": outputs differ; ";
      }
    }
  }
  fs::remove_all(dir);
  return report(11, ok, "identical seeds give bitwise-identical instance files and CSV histories",
                detail.empty() ? "4 gen/run pairs compared byte for byte" : detail);
}

}  // namespace

int main() {
  std::vector<Run> runs;
  for (Family family : {Family::Smooth, Family::Nonsmooth}) {
    for (Treatment treatment : {Treatment::Subdiff, Treatment::Prox}) {
      for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) runs.push_back(experiment(family, treatment, seed));
    }
  }
  std::vector<bool> results;
  results.push_back(criterion_ascent(runs));
  results.push_back(criterion_gap_bound(runs));
  results.push_back(criterion_smooth_linear(runs));
  results.push_back(criterion_prox_nonsmooth(runs));
  results.push_back(criterion_subdiff_nonsmooth(runs));
  results.push_back(criterion_sqrt_bound(runs));
  results.push_back(criterion_bundle());
  results.push_back(criterion_recurrence());
  results.push_back(criterion_oracles());
  results.push_back(criterion_reset());
  results.push_back(criterion_determinism());
  const auto failed = std::count(results.begin(), results.end(), false);
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
