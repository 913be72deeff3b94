#include "distdyk/funcs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "distdyk/error.hpp"

namespace distdyk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieRelTol = 1e-12;
constexpr double kRootTol = 1e-12;
constexpr int kRootMaxIter = 200;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double quad_value(const Mat& A, const Vec& b, double c, const Vec& x) { return 0.5 * x.dot(A * x) + b.dot(x) + c; }

bool is_tie(double f1, double f2) {
  const double scale = std::max({1.0, std::abs(f1), std::abs(f2)});
  return std::abs(f1 - f2) <= kTieRelTol * scale;
}

void check_square(const Mat& A, std::size_t m, const char* what) {
  if (static_cast<std::size_t>(A.rows()) != m || static_cast<std::size_t>(A.cols()) != m) {
    throw StructuralError(std::string(what) + ": A must be m x m");
  }
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw StructuralError(std::string(what) + ": A must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(A, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw StructuralError(std::string(what) + ": A must be positive semidefinite");
  }
}

void check_dim(const Vec& v, std::size_t m, const char* what) {
  if (static_cast<std::size_t>(v.size()) != m) throw StructuralError(std::string(what) + ": dimension mismatch");
}

std::size_t infer_dim(const FunctionKind& kind) {
  return std::visit(Overloaded{
                        [](const ZeroFn& f) { return f.dim; },
                        [](const Quadratic& f) { return static_cast<std::size_t>(f.b.size()); },
                        [](const MaxTwoQuadratics& f) { return static_cast<std::size_t>(f.b1.size()); },
                        [](const AffinePair& f) { return static_cast<std::size_t>(f.a1.size()); },
                        [](const IndicatorBox& f) { return static_cast<std::size_t>(f.lo.size()); },
                        [](const IndicatorHalfspace& f) { return static_cast<std::size_t>(f.a.size()); },
                    },
                    kind);
}

struct MaxTwoSolution {
  Vec x;
  double theta;
};

// Minimises max{q1, q2}(x) + mu/2 ||x||^2 - <p, x> over x, where q_j share the
// quadratic term A. For a fixed multiplier theta the minimiser solves
// (A + mu I) x = p - theta b1 - (1 - theta) b2; the optimal theta is where the
// branch values agree, unless one branch dominates at its own solution.
std::optional<MaxTwoSolution> solve_max_two(const MaxTwoQuadratics& f, double mu, const Vec& p) {
  const auto m = f.A.rows();
  const Mat M = f.A + mu * Mat::Identity(m, m);
  Eigen::LLT<Mat> llt(M);
  if (llt.info() != Eigen::Success) return std::nullopt;

  const Vec db = f.b1 - f.b2;
  const double dc = f.c1 - f.c2;
  auto x_at = [&](double theta) -> Vec { return llt.solve(p - theta * f.b1 - (1.0 - theta) * f.b2); };
  // q1 - q2 is affine because A is shared.
  auto gap_at = [&](const Vec& x) { return db.dot(x) + dc; };

  Vec x1 = x_at(1.0);
  const double g1 = gap_at(x1);
  if (g1 >= 0.0) return MaxTwoSolution{std::move(x1), 1.0};
  Vec x0 = x_at(0.0);
  const double g0 = gap_at(x0);
  if (g0 <= 0.0) return MaxTwoSolution{std::move(x0), 0.0};

  // g is decreasing in theta with g(0) > 0 > g(1). Bracketed false position
  // (Illinois variant), which lands on the root immediately when g is exactly affine.
  double lo = 0.0, hi = 1.0, glo = g0, ghi = g1;
  double theta = 0.5;
  Vec x = x0;
  int side = 0;
  for (int it = 0; it < kRootMaxIter; ++it) {
    theta = lo - glo * (hi - lo) / (ghi - glo);
    if (!(theta > lo && theta < hi)) theta = 0.5 * (lo + hi);
    x = x_at(theta);
    const double g = gap_at(x);
    if (std::abs(g) <= kRootTol || hi - lo <= 1e-16) break;
    if (g > 0.0) {
      lo = theta;
      glo = g;
      if (side == 1) ghi *= 0.5;
      side = 1;
    } else {
      hi = theta;
      ghi = g;
      if (side == -1) glo *= 0.5;
      side = -1;
    }
  }
  return MaxTwoSolution{std::move(x), theta};
}

ProxResult finish(const NodeFunction& f, const Vec& p, Vec x) {
  ProxResult r;
  r.z = p - x;
  r.witness_value = eval(f, x);
  r.x = std::move(x);
  return r;
}

}  // namespace

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::V1: return "V1";
    case NodeClass::V2: return "V2";
    case NodeClass::V3: return "V3";
    case NodeClass::V4: return "V4";
  }
  return "?";
}

NodeClass node_class_from_string(std::string_view s) {
  if (s == "V1") return NodeClass::V1;
  if (s == "V2") return NodeClass::V2;
  if (s == "V3") return NodeClass::V3;
  if (s == "V4") return NodeClass::V4;
  throw StructuralError("unknown node class '" + std::string(s) + "'");
}

NodeFunction::NodeFunction(FunctionKind kind, NodeClass cls) : kind_(std::move(kind)), class_(cls) {
  dim_ = infer_dim(kind_);
  if (dim_ == 0) throw StructuralError("NodeFunction: dimension must be >= 1");
  std::visit(Overloaded{
                 [](const ZeroFn&) {},
                 [&](const Quadratic& f) { check_square(f.A, dim_, "Quadratic"); },
                 [&](const MaxTwoQuadratics& f) {
                   check_square(f.A, dim_, "MaxTwoQuadratics");
                   check_dim(f.b2, dim_, "MaxTwoQuadratics");
                 },
                 [&](const AffinePair& f) { check_dim(f.a2, dim_, "AffinePair"); },
                 [&](const IndicatorBox& f) { check_dim(f.hi, dim_, "IndicatorBox"); },
                 [](const IndicatorHalfspace&) {},
             },
             kind_);
  if (class_ == NodeClass::V2 && !is_indicator()) {
    throw PreconditionError("class V2 is reserved for indicator functions");
  }
  if ((class_ == NodeClass::V3 || class_ == NodeClass::V4) && !full_domain()) {
    throw PreconditionError(std::string("class ") + std::string(to_string(class_)) + " requires a full-domain function");
  }
}

bool NodeFunction::is_indicator() const noexcept {
  return std::holds_alternative<IndicatorBox>(kind_) || std::holds_alternative<IndicatorHalfspace>(kind_);
}

std::string_view NodeFunction::kind_name() const noexcept {
  return std::visit(Overloaded{
                        [](const ZeroFn&) { return std::string_view("zero"); },
                        [](const Quadratic&) { return std::string_view("quadratic"); },
                        [](const MaxTwoQuadratics&) { return std::string_view("max_two_quadratics"); },
                        [](const AffinePair&) { return std::string_view("affine_pair"); },
                        [](const IndicatorBox&) { return std::string_view("indicator_box"); },
                        [](const IndicatorHalfspace&) { return std::string_view("indicator_halfspace"); },
                    },
                    kind_);
}

AffineMinorant AffineMinorant::tangent(const NodeFunction& f, const Vec& q) {
  AffineMinorant out;
  out.slope = subgradient(f, q);
  out.intercept = eval(f, q) - out.slope.dot(q);
  out.anchor = q;
  out.anchor_error = 0.0;
  return out;
}

double difference(const NodeFunction& f, const Vec& x, const Vec& y) {
  check_dim(x, f.dim(), "difference");
  check_dim(y, f.dim(), "difference");
  const Vec d = x - y;
  // q(x) - q(y) for 1/2 v^T A v + b^T v, written as (x - y)^T (A (x + y) / 2 + b).
  auto quad_diff = [&](const Mat& A, const Vec& b) { return d.dot(0.5 * (A * (x + y)) + b); };
  return std::visit(
      Overloaded{
          [](const ZeroFn&) { return 0.0; },
          [&](const Quadratic& q) { return quad_diff(q.A, q.b); },
          [&](const MaxTwoQuadratics& q) {
            // g = q1 - q2 is affine because the branches share A.
            auto g = [&](const Vec& v) { return (q.b1 - q.b2).dot(v) + (q.c1 - q.c2); };
            const bool first_x = g(x) >= 0.0;
            const bool first_y = g(y) >= 0.0;
            const double same = first_x ? quad_diff(q.A, q.b1) : quad_diff(q.A, q.b2);
            if (first_x == first_y) return same;
            return same + (first_x ? g(y) : -g(y));
          },
          [&](const AffinePair& a) {
            auto g = [&](const Vec& v) { return (a.a1 - a.a2).dot(v) + (a.b1 - a.b2); };
            const bool first_x = g(x) >= 0.0;
            const bool first_y = g(y) >= 0.0;
            const double same = first_x ? a.a1.dot(d) : a.a2.dot(d);
            if (first_x == first_y) return same;
            return same + (first_x ? g(y) : -g(y));
          },
          [](const IndicatorBox&) -> double {
            throw CapabilityError("difference is not available for indicator functions");
          },
          [](const IndicatorHalfspace&) -> double {
            throw CapabilityError("difference is not available for indicator functions");
          },
      },
      f.kind());
}

double linearization_error(const NodeFunction& f, const AffineMinorant& m, const Vec& x) {
  if (m.anchor.size() == 0) return eval(f, x) - m(x);
  return difference(f, x, m.anchor) - m.slope.dot(x - m.anchor) + m.anchor_error;
}

double eval(const NodeFunction& f, const Vec& x) {
  check_dim(x, f.dim(), "eval");
  return std::visit(Overloaded{
                        [](const ZeroFn&) { return 0.0; },
                        [&](const Quadratic& q) { return quad_value(q.A, q.b, q.c, x); },
                        [&](const MaxTwoQuadratics& q) {
                          return std::max(quad_value(q.A, q.b1, q.c1, x), quad_value(q.A, q.b2, q.c2, x));
                        },
                        [&](const AffinePair& a) { return std::max(a.a1.dot(x) + a.b1, a.a2.dot(x) + a.b2); },
                        [&](const IndicatorBox& b) {
                          return ((x.array() >= b.lo.array()) && (x.array() <= b.hi.array())).all() ? 0.0 : kInf;
                        },
                        [&](const IndicatorHalfspace& h) { return h.a.dot(x) <= h.beta ? 0.0 : kInf; },
                    },
                    f.kind());
}

std::optional<std::pair<double, double>> branch_values(const NodeFunction& f, const Vec& x) {
  if (const auto* q = std::get_if<MaxTwoQuadratics>(&f.kind())) {
    return std::pair{quad_value(q->A, q->b1, q->c1, x), quad_value(q->A, q->b2, q->c2, x)};
  }
  if (const auto* a = std::get_if<AffinePair>(&f.kind())) {
    return std::pair{a->a1.dot(x) + a->b1, a->a2.dot(x) + a->b2};
  }
  return std::nullopt;
}

Vec subgradient(const NodeFunction& f, const Vec& x) {
  check_dim(x, f.dim(), "subgradient");
  return std::visit(Overloaded{
                        [&](const ZeroFn&) -> Vec { return Vec::Zero(x.size()); },
                        [&](const Quadratic& q) -> Vec { return q.A * x + q.b; },
                        [&](const MaxTwoQuadratics& q) -> Vec {
                          const double f1 = quad_value(q.A, q.b1, q.c1, x);
                          const double f2 = quad_value(q.A, q.b2, q.c2, x);
                          const Vec ax = q.A * x;
                          if (is_tie(f1, f2)) return ax + 0.5 * (q.b1 + q.b2);
                          return f1 > f2 ? Vec(ax + q.b1) : Vec(ax + q.b2);
                        },
                        [&](const AffinePair& a) -> Vec {
                          const double f1 = a.a1.dot(x) + a.b1;
                          const double f2 = a.a2.dot(x) + a.b2;
                          if (is_tie(f1, f2)) return 0.5 * (a.a1 + a.a2);
                          return f1 > f2 ? a.a1 : a.a2;
                        },
                        [](const IndicatorBox&) -> Vec {
                          throw CapabilityError("subgradient is not available for indicator functions");
                        },
                        [](const IndicatorHalfspace&) -> Vec {
                          throw CapabilityError("subgradient is not available for indicator functions");
                        },
                    },
                    f.kind());
}

AffinePairProx prox_max_two_affine(const Vec& a1, double b1, const Vec& a2, double b2, const Vec& p) {
  if (a1.size() != p.size() || a2.size() != p.size()) throw StructuralError("prox_max_two_affine: dimension mismatch");
  return prox_max_two_affine(a1, b1, a2, b2, p, (a1 - a2).dot(p) + (b1 - b2));
}

AffinePairProx prox_max_two_affine(const Vec& a1, double b1, const Vec& a2, double b2, const Vec& p,
                                   double gap_at_p) {
  if (a1.size() != p.size() || a2.size() != p.size()) throw StructuralError("prox_max_two_affine: dimension mismatch");
  const Vec da = a1 - a2;
  const double denom = da.squaredNorm();
  double theta;
  if (denom == 0.0) {
    theta = gap_at_p >= 0.0 ? 1.0 : 0.0;
  } else {
    // Branch gap at p - a2, the single-branch solution for the second piece.
    theta = (gap_at_p - da.dot(a2)) / denom;
    theta = std::clamp(theta, 0.0, 1.0);
  }
  AffinePairProx out;
  out.theta = theta;
  out.result.z = theta * a1 + (1.0 - theta) * a2;
  out.result.x = p - out.result.z;
  out.result.witness_value = std::max(a1.dot(out.result.x) + b1, a2.dot(out.result.x) + b2);
  return out;
}

double minorant_gap(const NodeFunction& f, const AffineMinorant& m1, const AffineMinorant& m2, const Vec& p) {
  if (m1.anchor.size() == 0 || m2.anchor.size() == 0) return m1(p) - m2(p);
  // m1(p) - m2(p) = [f - m2](anchor1) - [f - m1](anchor1) + (slope1 - slope2)^T (p - anchor1)
  return linearization_error(f, m2, m1.anchor) - m1.anchor_error + (m1.slope - m2.slope).dot(p - m1.anchor);
}

namespace {

/// The projection onto {a.x <= beta} can land a rounding error outside; step
/// back along a until eval sees the point as feasible.
Vec into_halfspace(const IndicatorHalfspace& h, Vec x) {
  const double an = h.a.squaredNorm();
  for (int k = 0; k < 16; ++k) {
    const double excess = h.a.dot(x) - h.beta;
    if (excess <= 0.0) break;
    const double floor = std::numeric_limits<double>::epsilon() * (1.0 + std::abs(h.beta)) * std::ldexp(1.0, k);
    x -= (std::max(excess, floor) / an) * h.a;
  }
  return x;
}

}  // namespace

ProxResult prox(const NodeFunction& f, const Vec& p) {
  check_dim(p, f.dim(), "prox");
  return std::visit(Overloaded{
                        [&](const ZeroFn&) { return finish(f, p, p); },
                        [&](const Quadratic& q) {
                          const Mat M = q.A + Mat::Identity(q.A.rows(), q.A.cols());
                          return finish(f, p, M.llt().solve(p - q.b));
                        },
                        [&](const MaxTwoQuadratics& q) {
                          auto sol = solve_max_two(q, 1.0, p);
                          // I + A is positive definite for PSD A.
                          return finish(f, p, std::move(sol->x));
                        },
                        [&](const AffinePair& a) { return prox_max_two_affine(a.a1, a.b1, a.a2, a.b2, p).result; },
                        [&](const IndicatorBox& b) {
                          if ((b.lo.array() > b.hi.array()).any()) throw StructuralError("prox: empty box");
                          return finish(f, p, p.cwiseMax(b.lo).cwiseMin(b.hi));
                        },
                        [&](const IndicatorHalfspace& h) {
                          const double an = h.a.squaredNorm();
                          if (an == 0.0) {
                            if (h.beta < 0.0) throw StructuralError("prox: empty halfspace");
                            return finish(f, p, p);
                          }
                          const double excess = h.a.dot(p) - h.beta;
                          if (excess <= 0.0) return finish(f, p, p);
                          return finish(f, p, into_halfspace(h, p - (excess / an) * h.a));
                        },
                    },
                    f.kind());
}

double conjugate_at(const NodeFunction& f, const Vec& z, const Vec& witness) {
  check_dim(z, f.dim(), "conjugate_at");
  check_dim(witness, f.dim(), "conjugate_at");
  // For indicators z is a normal vector at the witness, which lies in the set.
  if (f.is_indicator()) return witness.dot(z);
  return witness.dot(z) - eval(f, witness);
}

double conjugate_at(const AffineMinorant& f, const Vec& z) {
  if (z.size() != f.slope.size()) throw StructuralError("conjugate_at: dimension mismatch");
  if ((z - f.slope).norm() > 1e-8) {
    throw ConsistencyError("conjugate of affine minorant requested away from its slope");
  }
  return -f.intercept;
}

std::optional<Vec> conjugate_witness(const NodeFunction& f, const Vec& z) {
  check_dim(z, f.dim(), "conjugate_witness");
  const auto m = z.size();
  return std::visit(
      Overloaded{
          [&](const ZeroFn&) -> std::optional<Vec> {
            if (z.cwiseAbs().maxCoeff() > 1e-12) return std::nullopt;
            return Vec::Zero(m);
          },
          [&](const Quadratic& q) -> std::optional<Vec> {
            // A x = z - b; consistent only when z - b lies in range(A).
            const Vec rhs = z - q.b;
            Eigen::LDLT<Mat> ldlt(q.A);
            Vec x = ldlt.solve(rhs);
            if (!x.allFinite() || (q.A * x - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) return std::nullopt;
            return x;
          },
          [&](const MaxTwoQuadratics& q) -> std::optional<Vec> {
            auto sol = solve_max_two(q, 0.0, z);
            if (!sol) return std::nullopt;
            return std::move(sol->x);
          },
          [&](const AffinePair& a) -> std::optional<Vec> {
            const Vec da = a.a1 - a.a2;
            const double denom = da.squaredNorm();
            if (denom == 0.0) {
              if ((z - a.a1).norm() > 1e-12) return std::nullopt;
              return Vec::Zero(m);
            }
            const double theta = da.dot(z - a.a2) / denom;
            if (theta < -1e-12 || theta > 1.0 + 1e-12) return std::nullopt;
            if ((theta * a.a1 + (1.0 - theta) * a.a2 - z).norm() > 1e-10) return std::nullopt;
            // a point where both pieces are active
            return Vec(-((a.b1 - a.b2) / denom) * da);
          },
          [&](const IndicatorBox& b) -> std::optional<Vec> {
            Vec x(m);
            for (Eigen::Index k = 0; k < m; ++k) {
              if (z(k) > 0.0) {
                x(k) = b.hi(k);
              } else if (z(k) < 0.0) {
                x(k) = b.lo(k);
              } else {
                x(k) = std::clamp(0.0, b.lo(k), b.hi(k));
              }
              if (!std::isfinite(x(k))) return std::nullopt;
            }
            return x;
          },
          [&](const IndicatorHalfspace& h) -> std::optional<Vec> {
            const double an = h.a.squaredNorm();
            if (an == 0.0) {
              if (h.beta < 0.0 || z.cwiseAbs().maxCoeff() > 1e-12) return std::nullopt;
              return Vec::Zero(m);
            }
            const double lambda = h.a.dot(z) / an;
            if (lambda < -1e-12 || (z - lambda * h.a).norm() > 1e-10 * (1.0 + z.norm())) return std::nullopt;
            return into_halfspace(h, (h.beta / an) * h.a);
          },
      },
      f.kind());
}

double curvature_bound(const NodeFunction& f) {
  const Mat* A = nullptr;
  if (const auto* q = std::get_if<Quadratic>(&f.kind())) A = &q->A;
  if (const auto* q = std::get_if<MaxTwoQuadratics>(&f.kind())) A = &q->A;
  if (A == nullptr) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> eig(*A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace distdyk
