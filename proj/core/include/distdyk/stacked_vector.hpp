#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace distdyk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// An element of the product space [R^m]^|V|: one m-dimensional block per node.
///
/// Blocks are stored as the columns of a dense m x |V| matrix, so block(i)
/// is a contiguous view.
class StackedVector {
 public:
  StackedVector() = default;
  /// Zero vector with `num_blocks` blocks of dimension `dim`. Both must be >= 1.
  StackedVector(std::size_t num_blocks, std::size_t dim);

  static StackedVector from_blocks(std::span<const Vec> blocks);
  /// Every block equal to `block`.
  static StackedVector replicate(const Vec& block, std::size_t num_blocks);

  std::size_t num_blocks() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.rows()); }

  Mat::ColXpr block(std::size_t i);
  Mat::ConstColXpr block(std::size_t i) const;

  const Mat& matrix() const noexcept { return data_; }
  Mat& matrix() noexcept { return data_; }

  bool same_shape(const StackedVector& other) const noexcept {
    return data_.rows() == other.data_.rows() && data_.cols() == other.data_.cols();
  }

  StackedVector& operator+=(const StackedVector& other);
  StackedVector& operator-=(const StackedVector& other);
  StackedVector& operator*=(double a);

  friend StackedVector operator+(StackedVector u, const StackedVector& v) { return u += v; }
  friend StackedVector operator-(StackedVector u, const StackedVector& v) { return u -= v; }
  friend StackedVector operator*(double a, StackedVector u) { return u *= a; }

  /// Bitwise equality of shape and entries.
  friend bool operator==(const StackedVector& u, const StackedVector& v) {
    return u.same_shape(v) && u.data_ == v.data_;
  }

 private:
  Mat data_;
};

/// a*u + v. Throws StructuralError on shape mismatch.
StackedVector axpy(double a, const StackedVector& u, const StackedVector& v);
double dot(const StackedVector& u, const StackedVector& v);
double norm_sq(const StackedVector& u);

}  // namespace distdyk
