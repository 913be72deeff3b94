#include "distdyk/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <variant>

#include <nlohmann/json.hpp>

#include "distdyk/error.hpp"

namespace distdyk {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw IoError("expected a number, got " + j.dump());
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(number(v(k)));
  return out;
}

Vec vec_from(const json& j) {
  if (!j.is_array()) throw IoError("expected an array, got " + j.dump());
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = to_number(j[k]);
  return v;
}

json mat_json(const Mat& a) {
  json out = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) out.push_back(vec_json(a.row(r).transpose()));
  return out;
}

Mat mat_from(const json& j) {
  if (!j.is_array() || j.empty()) throw IoError("expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    Vec row = vec_from(j[static_cast<std::size_t>(r)]);
    if (row.size() != cols) throw IoError("ragged matrix rows");
    a.row(r) = row.transpose();
  }
  return a;
}

json function_json(const NodeFunction& f) {
  json out;
  out["kind"] = std::string(f.kind_name());
  out["class"] = std::string(to_string(f.node_class()));
  std::visit(Overloaded{
                 [&](const ZeroFn& z) { out["dim"] = z.dim; },
                 [&](const Quadratic& q) {
                   out["A"] = mat_json(q.A);
                   out["b"] = vec_json(q.b);
                   out["c"] = q.c;
                 },
                 [&](const MaxTwoQuadratics& q) {
                   out["A"] = mat_json(q.A);
                   out["b1"] = vec_json(q.b1);
                   out["c1"] = q.c1;
                   out["b2"] = vec_json(q.b2);
                   out["c2"] = q.c2;
                 },
                 [&](const AffinePair& a) {
                   out["a1"] = vec_json(a.a1);
                   out["b1"] = a.b1;
                   out["a2"] = vec_json(a.a2);
                   out["b2"] = a.b2;
                 },
                 [&](const IndicatorBox& b) {
                   out["lo"] = vec_json(b.lo);
                   out["hi"] = vec_json(b.hi);
                 },
                 [&](const IndicatorHalfspace& h) {
                   out["a"] = vec_json(h.a);
                   out["beta"] = h.beta;
                 },
             },
             f.kind());
  return out;
}

NodeFunction function_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const NodeClass cls = node_class_from_string(j.at("class").get<std::string>());
  if (kind == "zero") return NodeFunction(ZeroFn{j.at("dim").get<std::size_t>()}, cls);
  if (kind == "quadratic") {
    return NodeFunction(Quadratic{mat_from(j.at("A")), vec_from(j.at("b")), to_number(j.at("c"))}, cls);
  }
  if (kind == "max_two_quadratics") {
    return NodeFunction(MaxTwoQuadratics{mat_from(j.at("A")), vec_from(j.at("b1")), to_number(j.at("c1")),
                                         vec_from(j.at("b2")), to_number(j.at("c2"))},
                        cls);
  }
  if (kind == "affine_pair") {
    return NodeFunction(
        AffinePair{vec_from(j.at("a1")), to_number(j.at("b1")), vec_from(j.at("a2")), to_number(j.at("b2"))}, cls);
  }
  if (kind == "indicator_box") return NodeFunction(IndicatorBox{vec_from(j.at("lo")), vec_from(j.at("hi"))}, cls);
  if (kind == "indicator_halfspace") {
    return NodeFunction(IndicatorHalfspace{vec_from(j.at("a")), to_number(j.at("beta"))}, cls);
  }
  throw IoError("unknown function kind '" + kind + "'");
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

json subspace_json(const SubspaceSet& subspaces, std::size_t id) {
  const Edge& e = subspaces.edge_of(id);
  json out = json::array({e.first, e.second});
  if (subspaces[id].coord) out.push_back(*subspaces[id].coord);
  return out;
}

std::size_t subspace_from(const json& j, const SubspaceSet& subspaces) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3)) throw IoError("edge must be [i,j] or [i,j,k]: " + j.dump());
  std::optional<std::size_t> coord;
  if (j.size() == 3) coord = j[2].get<std::size_t>();
  auto id = subspaces.find(j[0].get<std::size_t>(), j[1].get<std::size_t>(), coord);
  if (!id) throw StructuralError("schedule refers to an unknown edge subspace " + j.dump());
  return *id;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw IoError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw IoError("bad number '" + s + "'");
  }
}

}  // namespace

std::string instance_to_json(const Instance& instance) {
  json out;
  out["num_nodes"] = instance.num_nodes();
  out["dim"] = instance.dim;
  json edges = json::array();
  for (const Edge& e : instance.graph.edges()) edges.push_back({e.first, e.second});
  out["edges"] = edges;
  json anchor = json::array();
  for (std::size_t i = 0; i < instance.num_nodes(); ++i) anchor.push_back(vec_json(instance.anchor.block(i)));
  out["anchor"] = anchor;
  json nodes = json::array();
  for (const NodeFunction& f : instance.functions) nodes.push_back(function_json(f));
  out["nodes"] = nodes;
  out["planted_optimum"] = instance.planted_optimum ? vec_json(*instance.planted_optimum) : json(nullptr);
  return out.dump(2) + "\n";
}

Instance instance_from_json(std::string_view text) {
  const json j = parse(text);
  try {
    Instance inst;
    const auto n = j.at("num_nodes").get<std::size_t>();
    inst.dim = j.at("dim").get<std::size_t>();
    std::vector<Edge> edges;
    for (const json& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw IoError("edge must be [i,j]");
      edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    }
    inst.graph = Graph(n, std::move(edges));
    const json& anchor = j.at("anchor");
    if (anchor.size() != n) throw StructuralError("anchor needs one block per node");
    std::vector<Vec> blocks;
    for (const json& b : anchor) blocks.push_back(vec_from(b));
    inst.anchor = StackedVector::from_blocks(blocks);
    for (const json& f : j.at("nodes")) inst.functions.push_back(function_from(f));
    if (j.contains("planted_optimum") && !j["planted_optimum"].is_null()) {
      inst.planted_optimum = vec_from(j["planted_optimum"]);
    }
    for (const NodeFunction& f : inst.functions) inst.smoothness.push_back(curvature_bound(f));
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw IoError(std::string("invalid instance file: ") + e.what());
  }
}

std::string schedule_to_json(const Schedule& schedule, const SubspaceSet& subspaces) {
  json out;
  out["w_bar"] = schedule.w_bar;
  json cycles = json::array();
  for (const Cycle& c : schedule.cycles) {
    json cj;
    json active = json::array();
    for (std::size_t id : c.active_edges) active.push_back(subspace_json(subspaces, id));
    cj["active_edges"] = active;
    json blocks = json::array();
    for (const BlockSet& set : c.blocks) {
      json sj = json::array();
      for (const BlockRef& b : set) {
        if (b.kind == BlockKind::Node) {
          sj.push_back(b.id);
        } else {
          sj.push_back(subspace_json(subspaces, b.id));
        }
      }
      blocks.push_back(sj);
    }
    cj["blocks"] = blocks;
    cycles.push_back(cj);
  }
  out["cycles"] = cycles;
  return out.dump(2) + "\n";
}

Schedule schedule_from_json(std::string_view text, const SubspaceSet& subspaces) {
  const json j = parse(text);
  try {
    Schedule s;
    s.w_bar = j.at("w_bar").get<std::size_t>();
    for (const json& cj : j.at("cycles")) {
      Cycle c;
      for (const json& e : cj.at("active_edges")) c.active_edges.push_back(subspace_from(e, subspaces));
      for (const json& sj : cj.at("blocks")) {
        BlockSet set;
        for (const json& b : sj) {
          if (b.is_number_integer()) {
            set.push_back(BlockRef::node(b.get<std::size_t>()));
          } else {
            set.push_back(BlockRef::edge(subspace_from(b, subspaces)));
          }
        }
        c.blocks.push_back(std::move(set));
      }
      s.cycles.push_back(std::move(c));
    }
    return s;
  } catch (const json::exception& e) {
    throw IoError(std::string("invalid schedule file: ") + e.what());
  }
}

void write_history_csv(std::ostream& out, const RunHistory& history) {
  out << "n,w,dual_value,gap,dist_sq,step_norm_sq\n";
  for (const HistoryRecord& r : history) {
    out << r.n << ',' << r.w << ',' << format_double(r.dual_value) << ',' << format_double(r.gap) << ','
        << format_double(r.dist_sq) << ',' << format_double(r.step_norm_sq) << '\n';
  }
}

RunHistory read_history_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "n,w,dual_value,gap,dist_sq,step_norm_sq") {
    throw IoError("history CSV: missing or unexpected header");
  }
  RunHistory history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw IoError("history CSV: expected 6 columns in '" + line + "'");
    HistoryRecord r;
    try {
      r.n = std::stoul(cells[0]);
      r.w = std::stoul(cells[1]);
    } catch (const std::logic_error&) {
      throw IoError("history CSV: bad index in '" + line + "'");
    }
    r.dual_value = parse_double(cells[2]);
    r.gap = parse_double(cells[3]);
    r.dist_sq = parse_double(cells[4]);
    r.step_norm_sq = parse_double(cells[5]);
    history.push_back(r);
  }
  return history;
}

std::string rate_fit_to_json(const RateFit& fit) {
  json out;
  out["model"] = std::string(to_string(fit.model));
  out["parameter"] = number(fit.parameter);
  out["r_squared"] = number(fit.r_squared);
  out["window"] = {fit.window_lo, fit.window_hi};
  out["points"] = fit.points;
  return out.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed to read '" + path.string() + "'");
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed to write '" + path.string() + "'");
}

}  // namespace distdyk
