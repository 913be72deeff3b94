#include "distdyk/instances.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "distdyk/error.hpp"
#include "distdyk/rng.hpp"

namespace distdyk {

namespace {

Graph make_graph(GraphShape shape, std::size_t n) {
  switch (shape) {
    case GraphShape::Star: return Graph::star(n);
    case GraphShape::Path: return Graph::path(n);
    case GraphShape::Ring: return Graph::ring(n);
  }
  throw StructuralError("unknown graph shape");
}

Vec draw_vector(Rng& rng, std::size_t m) {
  Vec v(static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = rng.uniform();
  return v;
}

struct QuadraticDraw {
  Mat A;
  Vec target;  // designated subgradient at e
};

QuadraticDraw draw_quadratic(Rng& rng, std::size_t m) {
  const Vec v = draw_vector(rng, m);
  const double r = rng.uniform();
  QuadraticDraw out;
  out.A = v * v.transpose() + r * Mat::Identity(v.size(), v.size());
  out.target = draw_vector(rng, m);
  return out;
}

Instance assemble(Graph graph, std::size_t m, std::vector<NodeFunction> functions, const std::vector<Vec>& targets) {
  const std::size_t n = graph.num_nodes();
  const Vec e = Vec::Ones(static_cast<Eigen::Index>(m));
  Vec total = Vec::Zero(static_cast<Eigen::Index>(m));
  for (const Vec& t : targets) total += t;
  Instance inst;
  inst.graph = std::move(graph);
  inst.dim = m;
  inst.anchor = StackedVector::replicate(e + total / static_cast<double>(n), n);
  inst.functions = std::move(functions);
  inst.planted_optimum = e;
  for (const NodeFunction& f : inst.functions) inst.smoothness.push_back(curvature_bound(f));
  inst.validate();
  return inst;
}

}  // namespace

std::vector<NodeClass> Instance::classes() const {
  std::vector<NodeClass> out;
  out.reserve(functions.size());
  for (const NodeFunction& f : functions) out.push_back(f.node_class());
  return out;
}

void Instance::validate() const {
  if (dim == 0) throw StructuralError("Instance: dimension must be >= 1");
  if (functions.size() != graph.num_nodes()) throw StructuralError("Instance: one function per node required");
  if (anchor.num_blocks() != graph.num_nodes() || anchor.dim() != dim) {
    throw StructuralError("Instance: anchor shape does not match graph and dimension");
  }
  for (const NodeFunction& f : functions) {
    if (f.dim() != dim) throw StructuralError("Instance: node function dimension mismatch");
  }
  if (planted_optimum && static_cast<std::size_t>(planted_optimum->size()) != dim) {
    throw StructuralError("Instance: planted optimum dimension mismatch");
  }
}

Family family_from_string(std::string_view s) {
  if (s == "smooth") return Family::Smooth;
  if (s == "nonsmooth") return Family::Nonsmooth;
  throw StructuralError("unknown family '" + std::string(s) + "'");
}

GraphShape graph_shape_from_string(std::string_view s) {
  if (s == "star") return GraphShape::Star;
  if (s == "path") return GraphShape::Path;
  if (s == "ring") return GraphShape::Ring;
  throw StructuralError("unknown graph shape '" + std::string(s) + "'");
}

Treatment treatment_from_string(std::string_view s) {
  if (s == "subdiff") return Treatment::Subdiff;
  if (s == "prox") return Treatment::Prox;
  throw StructuralError("unknown treatment '" + std::string(s) + "'");
}

Instance gen_smooth(std::uint64_t seed, std::size_t num_nodes, std::size_t dim, GraphShape shape) {
  if (num_nodes == 0 || dim == 0) throw PreconditionError("gen_smooth: need at least one node and dim >= 1");
  Rng rng(seed);
  const Vec e = Vec::Ones(static_cast<Eigen::Index>(dim));
  std::vector<NodeFunction> functions;
  std::vector<Vec> targets;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    QuadraticDraw d = draw_quadratic(rng, dim);
    Vec b = d.target - d.A * e;
    functions.emplace_back(Quadratic{std::move(d.A), std::move(b), 0.0}, NodeClass::V4);
    targets.push_back(std::move(d.target));
  }
  return assemble(make_graph(shape, num_nodes), dim, std::move(functions), targets);
}

Instance gen_nonsmooth(std::uint64_t seed, std::size_t num_nodes, std::size_t dim, GraphShape shape) {
  if (num_nodes == 0 || dim == 0) throw PreconditionError("gen_nonsmooth: need at least one node and dim >= 1");
  Rng rng(seed);
  const Vec e = Vec::Ones(static_cast<Eigen::Index>(dim));
  std::vector<NodeFunction> functions;
  std::vector<Vec> targets;
  for (std::size_t i = 0; i < num_nodes; ++i) {
    QuadraticDraw q = draw_quadratic(rng, dim);
    Vec d = draw_vector(rng, dim);
    while (d.norm() < 1e-6) d = draw_vector(rng, dim);
    const Vec base = q.target - q.A * e;
    MaxTwoQuadratics f;
    f.b1 = base + d;
    f.b2 = base - d;
    f.c1 = 0.0;
    // equal branch values at e: b1.e + c1 = b2.e + c2
    f.c2 = 2.0 * d.dot(e);
    f.A = std::move(q.A);
    functions.emplace_back(std::move(f), NodeClass::V4);
    targets.push_back(std::move(q.target));
  }
  return assemble(make_graph(shape, num_nodes), dim, std::move(functions), targets);
}

Instance generate(Family family, std::uint64_t seed, std::size_t num_nodes, std::size_t dim, GraphShape shape) {
  return family == Family::Smooth ? gen_smooth(seed, num_nodes, dim, shape)
                                  : gen_nonsmooth(seed, num_nodes, dim, shape);
}

double primal_value_at(const Instance& instance, const Vec& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < instance.num_nodes(); ++i) {
    const double fi = eval(instance.functions[i], x);
    if (std::isinf(fi)) return std::numeric_limits<double>::infinity();
    total += 0.5 * (x - instance.anchor.block(i)).squaredNorm() + fi;
  }
  return total;
}

std::vector<Vec> designated_subgradients(const Instance& instance, const Vec& x) {
  std::vector<Vec> out;
  out.reserve(instance.num_nodes());
  for (const NodeFunction& f : instance.functions) out.push_back(subgradient(f, x));
  return out;
}

double planted_certificate_residual(const Instance& instance) {
  if (!instance.planted_optimum) return std::numeric_limits<double>::quiet_NaN();
  const Vec& e = *instance.planted_optimum;
  Vec residual = Vec::Zero(e.size());
  const std::vector<Vec> subs = designated_subgradients(instance, e);
  for (std::size_t i = 0; i < instance.num_nodes(); ++i) residual += subs[i] + (e - instance.anchor.block(i));
  return residual.cwiseAbs().maxCoeff();
}

Instance with_treatment(const Instance& instance, Treatment treatment) {
  Instance out = instance;
  const NodeClass cls = treatment == Treatment::Subdiff ? NodeClass::V4 : NodeClass::V1;
  for (NodeFunction& f : out.functions) {
    if (f.full_domain()) f = f.with_class(cls);
  }
  return out;
}

}  // namespace distdyk
