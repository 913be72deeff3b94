#include "distdyk_cli/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "distdyk/analysis.hpp"
#include "distdyk/engine.hpp"
#include "distdyk/error.hpp"
#include "distdyk/instances.hpp"
#include "distdyk/io.hpp"
#include "distdyk/schedule.hpp"

namespace distdyk::cli {

namespace {

using nlohmann::json;

/// Reads --config files written as JSON. Nested objects become option groups
/// (subcommand names); arrays become repeated values. Top-level scalars belong
/// to `section`, the subcommand named on the command line.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string section) : section_(std::move(section)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    for (CLI::ConfigItem& item : items) {
      if (item.parents.empty() && !section_.empty()) item.parents.push_back(section_);
    }
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        std::vector<std::string> inner = parents;
        inner.push_back(key);
        flatten(value, inner, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const json& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  std::string section_;
};

struct GenOptions {
  std::string family;
  std::uint64_t seed = 1;
  std::size_t nodes = 5;
  std::size_t dim = 4;
  std::string graph = "star";
  std::string out;
};

struct RunOptions {
  std::string instance;
  std::string schedule = "star";
  std::size_t cycles = 200;
  std::string treat = "file";
  std::string edges = "full";
  std::string order = "interleaved";
  std::uint64_t seed = 1;
  double drop_prob = 0.3;
  std::string csv;
  std::string summary;
  std::optional<double> corrupt_minorant;
};

struct RatesOptions {
  std::string csv;
  std::string model = "linear";
  std::string window;
  std::string field = "gap";
  std::string floor = "auto";
  std::string out;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(6) << std::scientific << v;
  return ss.str();
}

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

int cmd_gen(const GenOptions& o, std::ostream& out) {
  const Instance inst =
      generate(family_from_string(o.family), o.seed, o.nodes, o.dim, graph_shape_from_string(o.graph));
  write_file(o.out, instance_to_json(inst));
  out << "wrote " << o.out << " (" << inst.num_nodes() << " nodes, m = " << inst.dim << ")\n";
  out << "planted optimum certificate residual: " << fmt(planted_certificate_residual(inst)) << "\n";
  return kOk;
}

/// Everything a run or verify command needs, built from the options.
struct Setup {
  Instance instance;
  SubspaceSet subspaces;
  Schedule schedule;
  std::optional<ReferenceOptimum> reference;
};

Setup build_setup(const RunOptions& o) {
  Setup s;
  s.instance = instance_from_json(read_file(o.instance));
  if (o.treat != "file") s.instance = with_treatment(s.instance, treatment_from_string(o.treat));
  if (o.edges == "full") {
    s.subspaces = SubspaceSet::full_edges(s.instance.graph, s.instance.dim);
  } else if (o.edges == "coord") {
    s.subspaces = SubspaceSet::per_coordinate(s.instance.graph, s.instance.dim);
  } else {
    throw PreconditionError("--edges must be full or coord");
  }
  CyclicOrder order;
  if (o.order == "interleaved") {
    order = CyclicOrder::Interleaved;
  } else if (o.order == "edges-first") {
    order = CyclicOrder::EdgesThenNodes;
  } else {
    throw PreconditionError("--order must be interleaved or edges-first");
  }
  const std::vector<NodeClass> classes = s.instance.classes();
  if (o.schedule == "star") {
    s.schedule = star_schedule(s.subspaces);
  } else if (o.schedule == "cyclic") {
    s.schedule = cyclic_schedule(s.subspaces, classes, order);
  } else if (o.schedule == "timevary") {
    s.schedule = time_varying_schedule(s.subspaces, classes, o.seed, o.drop_prob, o.cycles, order);
  } else {
    s.schedule = schedule_from_json(read_file(o.schedule), s.subspaces);
  }
  try {
    s.reference = reference_optimum(s.instance);
  } catch (const UnsupportedError&) {
    s.reference.reset();
  }
  return s;
}

struct Outcome {
  RunHistory history;
  InvariantMonitor monitor;
  std::size_t warnings = 0;
  std::size_t w_bar = 0;
  std::size_t num_v4 = 0;
  bool has_reference = false;
};

Outcome execute(const RunOptions& o, std::uint64_t sample_seed) {
  Setup s = build_setup(o);
  Outcome result{{}, InvariantMonitor(sample_seed), 0, s.schedule.w_bar, 0, s.reference.has_value()};
  for (NodeClass c : s.instance.classes()) result.num_v4 += c == NodeClass::V4;
  Engine engine(std::move(s.instance), std::move(s.subspaces), std::move(s.schedule));
  result.warnings = count_warnings(engine.findings());
  if (s.reference) engine.set_reference(s.reference->x, s.reference->primal_value);
  if (o.corrupt_minorant) {
    for (std::size_t i = 0; i < engine.instance().num_nodes(); ++i) {
      if (engine.is_v4(i)) engine.shift_minorant(i, *o.corrupt_minorant);
    }
  }
  result.history = engine.run(o.cycles, &result.monitor);
  return result;
}

json summary_json(const Outcome& r) {
  json s;
  const HistoryRecord* last = r.history.empty() ? nullptr : &r.history.back();
  s["cycles"] = last ? last->n : 0;
  s["w_bar"] = r.w_bar;
  s["final_dual_value"] = last ? num(last->dual_value) : json(nullptr);
  s["final_gap"] = last ? num(last->gap) : json(nullptr);
  s["final_dist_sq"] = last ? num(last->dist_sq) : json(nullptr);
  s["warnings"] = r.warnings;
  s["max_reset_drift"] = num(std::max(r.monitor.max_reset_value_drift(), r.monitor.max_reset_sum_drift()));
  s["max_reset_value_drift"] = num(r.monitor.max_reset_value_drift());
  s["max_reset_sum_drift"] = num(r.monitor.max_reset_sum_drift());
  s["invariants_ok"] = r.monitor.all_passed();
  if (const CheckResult* f = r.monitor.first_failure()) {
    s["first_failure"] = {{"check", f->name}, {"n", *f->first_n}, {"w", *f->first_w}, {"message", f->first_message}};
  } else {
    s["first_failure"] = nullptr;
  }
  return s;
}

void report_failure(const InvariantMonitor& monitor, std::ostream& err) {
  if (const CheckResult* f = monitor.first_failure()) {
    err << "invariant violated: " << f->name << " at (n, w) = (" << *f->first_n << ", " << *f->first_w
        << "): " << f->first_message << "\n";
  }
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  Outcome r = execute(o, o.seed);
  if (!o.csv.empty()) {
    std::ostringstream csv;
    write_history_csv(csv, r.history);
    write_file(o.csv, csv.str());
  }
  const std::string summary = summary_json(r).dump(2) + "\n";
  if (!o.summary.empty()) write_file(o.summary, summary);
  out << summary;
  if (!r.monitor.all_passed()) {
    report_failure(r.monitor, err);
    return kInvariantViolation;
  }
  return kOk;
}

int cmd_verify(const RunOptions& o, std::ostream& out, std::ostream& err) {
  Outcome r = execute(o, o.seed);
  bool ok = true;
  for (const CheckResult& c : r.monitor.results()) {
    const bool pass = c.passed();
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << std::left << std::setw(22) << c.name << " checks=" << c.checks
        << " worst_slack=" << (c.checks ? fmt(c.worst_slack) : std::string("n/a"));
    if (!pass) out << " first=(" << *c.first_n << "," << *c.first_w << ") " << c.first_message;
    out << "\n";
  }
  // Without V4 nodes the gap decays at least like 1/n: n * gap over the tail
  // must stay within twice its value at the start of the tail.
  const std::vector<double> gaps = cycle_end_gaps(r.history);
  const auto [lo, hi] = default_window(gaps.size());
  if (r.num_v4 == 0 && r.has_reference && lo < hi) {
    const double base = static_cast<double>(lo) * gaps[lo - 1];
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = lo; n <= hi; ++n) worst = std::max(worst, static_cast<double>(n) * gaps[n - 1]);
    const bool pass = worst <= 2.0 * std::max(base, 0.0) + 1e-12;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << std::left << std::setw(22) << "gap-n-bounded"
        << " max n*gap=" << fmt(worst) << " bound=" << fmt(2.0 * base) << "\n";
  } else {
    out << "SKIP " << std::left << std::setw(22) << "gap-n-bounded"
        << " (needs V4 empty, a reference optimum and enough cycles)\n";
  }
  if (!ok) {
    report_failure(r.monitor, err);
    return kInvariantViolation;
  }
  return kOk;
}

std::pair<std::size_t, std::size_t> parse_window(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw PreconditionError("--window must be LO:HI");
  try {
    return {std::stoul(text.substr(0, colon)), std::stoul(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw PreconditionError("--window must be LO:HI with integer bounds");
  }
}

int cmd_rates(const RatesOptions& o, std::ostream& out) {
  std::ifstream in(o.csv);
  if (!in) throw IoError("cannot open '" + o.csv + "' for reading");
  const RunHistory history = read_history_csv(in);
  std::vector<double> series;
  double floor = 0.0;
  if (o.field == "gap") {
    series = cycle_end_gaps(history);
    if (o.floor == "auto") floor = gap_resolution(history);
  } else if (o.field == "dist_sq") {
    series = cycle_end_dist_sq(history);
  } else {
    throw PreconditionError("--field must be gap or dist_sq");
  }
  std::optional<std::pair<std::size_t, std::size_t>> window;
  if (!o.window.empty()) window = parse_window(o.window);
  if (o.floor != "auto") {
    try {
      floor = std::stod(o.floor);
    } catch (const std::logic_error&) {
      throw PreconditionError("--floor must be auto or a number");
    }
  }
  const RateFit fit = fit_rate(series, rate_model_from_string(o.model), window, floor);
  const std::string text = rate_fit_to_json(fit);
  if (!o.out.empty()) write_file(o.out, text);
  out << text;
  return kOk;
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--instance", o.instance, "Instance JSON file")->required();
  cmd->add_option("--schedule", o.schedule, "star | cyclic | timevary | path to a schedule JSON file")
      ->capture_default_str();
  cmd->add_option("--cycles", o.cycles, "Number of cycles")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--treat", o.treat, "subdiff (V4) | prox (V1) | file (classes as stored)")
      ->check(CLI::IsMember({"subdiff", "prox", "file"}))
      ->capture_default_str();
  cmd->add_option("--edges", o.edges, "full: one subspace per edge; coord: one per edge and coordinate")
      ->check(CLI::IsMember({"full", "coord"}))
      ->capture_default_str();
  cmd->add_option("--order", o.order, "Block order for generated cyclic schedules")
      ->check(CLI::IsMember({"interleaved", "edges-first"}))
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for time-varying schedules and probe sampling")->capture_default_str();
  cmd->add_option("--drop-prob", o.drop_prob, "Per-edge drop probability for timevary")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--csv", o.csv, "Per-step history CSV output");
  cmd->add_option("--summary", o.summary, "Also write the JSON summary here");
  cmd->add_option("--corrupt-minorant", o.corrupt_minorant,
                  "Raise every V4 minorant by this much before running (fault injection)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Distributed Dykstra / dual block-coordinate ascent experiments", "distdyk");
  app.require_subcommand(1);
  // subcommands pass --config up to here; CLI11 only reads config at the top level
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>(args.empty() ? std::string() : args.front()));
  app.set_config("--config", "", "JSON file with option values; keys are option names, optionally grouped by subcommand");

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a seeded instance with a planted optimum");
  gen_cmd->add_option("--family", gen.family, "smooth | nonsmooth")
      ->required()
      ->check(CLI::IsMember({"smooth", "nonsmooth"}));
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--nodes", gen.nodes, "Number of nodes")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--dim", gen.dim, "Block dimension m")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--graph", gen.graph, "star | path | ring")
      ->check(CLI::IsMember({"star", "path", "ring"}))
      ->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output instance JSON")->required();

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run the algorithm and write the history");
  add_run_options(run_cmd, run);

  RunOptions verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run with every runtime check and report pass/fail");
  add_run_options(verify_cmd, verify);

  RatesOptions rates;
  CLI::App* rates_cmd = app.add_subcommand("rates", "Fit a convergence rate to cycle-end values of a history CSV");
  rates_cmd->add_option("--csv", rates.csv, "History CSV from run")->required();
  rates_cmd->add_option("--model", rates.model, "linear | power")
      ->check(CLI::IsMember({"linear", "power"}))
      ->capture_default_str();
  rates_cmd->add_option("--window", rates.window, "LO:HI cycle window (default max(10,N/4):N)");
  rates_cmd->add_option("--field", rates.field, "gap | dist_sq")
      ->check(CLI::IsMember({"gap", "dist_sq"}))
      ->capture_default_str();
  rates_cmd->add_option("--floor", rates.floor,
                        "Values at or below this are skipped; auto = rounding level of the dual value for gap, 0 otherwise")
      ->capture_default_str();
  rates_cmd->add_option("--out", rates.out, "Also write the JSON report here");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (e.get_name() == "FileError") return kIo;
    err << "run with --help for usage\n";
    return kUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*run_cmd) return cmd_run(run, out, err);
    if (*verify_cmd) return cmd_verify(verify, out, err);
    if (*rates_cmd) return cmd_rates(rates, out);
  } catch (const StepError& e) {
    err << "error: " << e.what() << "\n";
    return kInvariantViolation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace distdyk::cli
