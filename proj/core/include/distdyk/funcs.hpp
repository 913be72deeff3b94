#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <variant>

#include "distdyk/stacked_vector.hpp"

namespace distdyk {

/// How the algorithm treats a node function.
///   V1: proximable, V2: indicator of a closed convex set,
///   V3: proximable with full domain, V4: full domain, handled through subgradients only.
enum class NodeClass { V1, V2, V3, V4 };

std::string_view to_string(NodeClass c);
NodeClass node_class_from_string(std::string_view s);

struct ZeroFn {
  std::size_t dim = 1;
};

/// 1/2 x^T A x + b^T x + c with A symmetric positive semidefinite.
struct Quadratic {
  Mat A;
  Vec b;
  double c = 0.0;
};

/// max{q1, q2} where q_j(x) = 1/2 x^T A x + b_j^T x + c_j share the same A.
struct MaxTwoQuadratics {
  Mat A;
  Vec b1;
  double c1 = 0.0;
  Vec b2;
  double c2 = 0.0;
};

/// max{a1^T x + b1, a2^T x + b2}; |x| in one dimension is {1, 0, -1, 0}.
struct AffinePair {
  Vec a1;
  double b1 = 0.0;
  Vec a2;
  double b2 = 0.0;
};

/// Indicator of {x : lo <= x <= hi}; bounds may be infinite.
struct IndicatorBox {
  Vec lo;
  Vec hi;
};

/// Indicator of {x : a^T x <= beta}.
struct IndicatorHalfspace {
  Vec a;
  double beta = 0.0;
};

using FunctionKind = std::variant<ZeroFn, Quadratic, MaxTwoQuadratics, AffinePair, IndicatorBox, IndicatorHalfspace>;

/// A convex function on R^m together with its treatment class.
class NodeFunction {
 public:
  /// Validates shapes, symmetry and PSD-ness of quadratic data, and that the
  /// class is admissible for the kind (V2 only for indicators, V3/V4 only for
  /// full-domain kinds). Throws StructuralError / PreconditionError.
  NodeFunction(FunctionKind kind, NodeClass cls);

  const FunctionKind& kind() const noexcept { return kind_; }
  NodeClass node_class() const noexcept { return class_; }
  std::size_t dim() const noexcept { return dim_; }
  bool is_indicator() const noexcept;
  bool full_domain() const noexcept { return !is_indicator(); }
  std::string_view kind_name() const noexcept;

  NodeFunction with_class(NodeClass cls) const { return NodeFunction(kind_, cls); }

 private:
  FunctionKind kind_;
  NodeClass class_;
  std::size_t dim_ = 0;
};

/// x -> slope^T x + intercept.
///
/// A minorant built for a function f also remembers an anchor point and the
/// linearisation error f(anchor) - minorant(anchor) there. Near the anchor that
/// error is small, and keeping it as its own number preserves its relative
/// precision; recovering it from the intercept would cancel two O(|f|) values.
struct AffineMinorant {
  Vec slope;
  double intercept = 0.0;
  Vec anchor;                 // empty when unknown
  double anchor_error = 0.0;  // f(anchor) - (slope^T anchor + intercept)

  double operator()(const Vec& x) const { return slope.dot(x) + intercept; }

  /// Linearisation f(q) + <s, x - q> with s = subgradient(f, q).
  static AffineMinorant tangent(const NodeFunction& f, const Vec& q);
};

/// f(x) - f(y) for full-domain kinds, evaluated without forming f(x) and f(y)
/// separately, so the result keeps relative precision when x is close to y.
double difference(const NodeFunction& f, const Vec& x, const Vec& y);

/// f(x) - m(x), through m's anchor when it has one.
double linearization_error(const NodeFunction& f, const AffineMinorant& m, const Vec& x);

/// m1(p) - m2(p) for two minorants of f, through their anchors when both have one.
double minorant_gap(const NodeFunction& f, const AffineMinorant& m1, const AffineMinorant& m2, const Vec& p);

struct ProxResult {
  Vec x;                        // argmin 1/2||x - p||^2 + f(x)
  Vec z;                        // p - x, an element of the subdifferential at x
  double witness_value = 0.0;   // f(x)
};

struct AffinePairProx {
  ProxResult result;
  double theta = 0.0;  // z = theta * a1 + (1 - theta) * a2
};

/// f(x); +infinity outside an indicator's set (no tolerance).
double eval(const NodeFunction& f, const Vec& x);

/// Deterministic subgradient. For max-type kinds, branch values within 1e-12
/// relative are a tie and the average of the branch gradients is returned.
/// Throws CapabilityError for indicators.
Vec subgradient(const NodeFunction& f, const Vec& x);

/// Exact proximal map. Throws StructuralError for an empty indicator set.
ProxResult prox(const NodeFunction& f, const Vec& p);

/// Closed-form prox of max{a1^T x + b1, a2^T x + b2} at p.
AffinePairProx prox_max_two_affine(const Vec& a1, double b1, const Vec& a2, double b2, const Vec& p);
/// Same, with the branch gap (a1 - a2)^T p + b1 - b2 supplied by a caller that
/// knows it more accurately than the intercepts do.
AffinePairProx prox_max_two_affine(const Vec& a1, double b1, const Vec& a2, double b2, const Vec& p,
                                   double gap_at_p);

/// f*(z) from a primal witness with z in the subdifferential at `witness`:
/// <witness, z> - f(witness). The caller guarantees the subgradient relation.
double conjugate_at(const NodeFunction& f, const Vec& z, const Vec& witness);

/// Conjugate of an affine function at z: -intercept. Throws ConsistencyError if
/// ||z - slope|| > 1e-8, since the conjugate is then +infinity and a caller
/// reaching this path has lost track of its dual state.
double conjugate_at(const AffineMinorant& f, const Vec& z);

/// A point x with z in the subdifferential at x, when one exists (z in dom f* and
/// the maximiser of <z,x> - f(x) is attained).
std::optional<Vec> conjugate_witness(const NodeFunction& f, const Vec& z);

/// Largest eigenvalue of the quadratic part (gradient Lipschitz modulus); 0 for affine and zero kinds.
double curvature_bound(const NodeFunction& f);

/// Branch values of a max-type function at x; std::nullopt for other kinds.
std::optional<std::pair<double, double>> branch_values(const NodeFunction& f, const Vec& x);

}  // namespace distdyk
