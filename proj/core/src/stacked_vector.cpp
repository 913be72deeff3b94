#include "distdyk/stacked_vector.hpp"

#include <stdexcept>
#include <string>

#include "distdyk/error.hpp"

namespace distdyk {

namespace {

void require_same_shape(const StackedVector& u, const StackedVector& v, const char* op) {
  if (!u.same_shape(v)) {
    throw StructuralError(std::string(op) + ": shape mismatch (" + std::to_string(u.num_blocks()) +
                          "x" + std::to_string(u.dim()) + " vs " + std::to_string(v.num_blocks()) +
                          "x" + std::to_string(v.dim()) + ")");
  }
}

}  // namespace

StackedVector::StackedVector(std::size_t num_blocks, std::size_t dim) {
  if (num_blocks == 0 || dim == 0) {
    throw StructuralError("StackedVector needs at least one block of dimension >= 1");
  }
  data_ = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(num_blocks));
}

StackedVector StackedVector::from_blocks(std::span<const Vec> blocks) {
  if (blocks.empty()) throw StructuralError("StackedVector::from_blocks: no blocks");
  StackedVector out(blocks.size(), static_cast<std::size_t>(blocks.front().size()));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (static_cast<std::size_t>(blocks[i].size()) != out.dim()) {
      throw StructuralError("StackedVector::from_blocks: blocks differ in dimension");
    }
    out.block(i) = blocks[i];
  }
  return out;
}

StackedVector StackedVector::replicate(const Vec& block, std::size_t num_blocks) {
  StackedVector out(num_blocks, static_cast<std::size_t>(block.size()));
  out.data_.colwise() = block;
  return out;
}

Mat::ColXpr StackedVector::block(std::size_t i) {
  if (i >= num_blocks()) throw std::out_of_range("StackedVector::block: index out of range");
  return data_.col(static_cast<Eigen::Index>(i));
}

Mat::ConstColXpr StackedVector::block(std::size_t i) const {
  if (i >= num_blocks()) throw std::out_of_range("StackedVector::block: index out of range");
  return data_.col(static_cast<Eigen::Index>(i));
}

StackedVector& StackedVector::operator+=(const StackedVector& other) {
  require_same_shape(*this, other, "operator+=");
  data_ += other.data_;
  return *this;
}

StackedVector& StackedVector::operator-=(const StackedVector& other) {
  require_same_shape(*this, other, "operator-=");
  data_ -= other.data_;
  return *this;
}

StackedVector& StackedVector::operator*=(double a) {
  data_ *= a;
  return *this;
}

StackedVector axpy(double a, const StackedVector& u, const StackedVector& v) {
  require_same_shape(u, v, "axpy");
  StackedVector out = v;
  out.matrix() += a * u.matrix();
  return out;
}

double dot(const StackedVector& u, const StackedVector& v) {
  require_same_shape(u, v, "dot");
  return u.matrix().cwiseProduct(v.matrix()).sum();
}

double norm_sq(const StackedVector& u) { return u.matrix().squaredNorm(); }

}  // namespace distdyk
