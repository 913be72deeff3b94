#include "doctest.h"

#include "distdyk/error.hpp"
#include "distdyk/rng.hpp"
#include "distdyk/stacked_vector.hpp"
#include "helpers.hpp"

using namespace distdyk;
using testing::vec;

namespace {

StackedVector random_stacked(Rng& rng, std::size_t blocks, std::size_t dim) {
  StackedVector u(blocks, dim);
  for (std::size_t i = 0; i < blocks; ++i) u.block(i) = testing::random_vec(rng, static_cast<Eigen::Index>(dim), -5, 5);
  return u;
}

}  // namespace

TEST_CASE("stacked vector shape") {
  StackedVector u(3, 2);
  CHECK(u.num_blocks() == 3);
  CHECK(u.dim() == 2);
  CHECK(norm_sq(u) == 0.0);
  CHECK_THROWS_AS(StackedVector(0, 2), StructuralError);
  CHECK_THROWS_AS(StackedVector(2, 0), StructuralError);

  const std::vector<Vec> blocks{vec({1, 2}), vec({3, 4})};
  const StackedVector w = StackedVector::from_blocks(blocks);
  CHECK(w.block(1)(0) == 3.0);
  const std::vector<Vec> ragged{vec({1, 2}), vec({3})};
  CHECK_THROWS_AS(StackedVector::from_blocks(ragged), StructuralError);

  const StackedVector r = StackedVector::replicate(vec({7, 8}), 4);
  CHECK(r.num_blocks() == 4);
  CHECK(r.block(3)(1) == 8.0);
}

TEST_CASE("axpy examples") {
  Rng rng(1);
  const StackedVector u = random_stacked(rng, 3, 2);
  const StackedVector v = random_stacked(rng, 3, 2);
  CHECK(axpy(0.0, u, v) == v);

  const StackedVector ones = StackedVector::replicate(vec({1}), 2);
  const StackedVector two = axpy(1.0, ones, ones);
  CHECK(two.block(0)(0) == 2.0);
  CHECK(two.block(1)(0) == 2.0);

  CHECK(norm_sq(axpy(-1.0, u, u)) == 0.0);
  CHECK_THROWS_AS(axpy(1.0, u, StackedVector(2, 2)), StructuralError);
  CHECK_THROWS_AS(dot(u, StackedVector(3, 3)), StructuralError);
}

TEST_CASE("norm_sq examples") {
  CHECK(norm_sq(StackedVector(4, 3)) == 0.0);
  const std::vector<Vec> blocks{vec({3}), vec({4})};
  CHECK(norm_sq(StackedVector::from_blocks(blocks)) == 25.0);

  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const StackedVector u = random_stacked(rng, 5, 4);
    double independent = 0.0;
    for (std::size_t i = 0; i < u.num_blocks(); ++i) {
      for (std::size_t k = 0; k < u.dim(); ++k) independent += u.block(i)(static_cast<Eigen::Index>(k)) * u.block(i)(static_cast<Eigen::Index>(k));
    }
    CHECK(norm_sq(u) == doctest::Approx(independent).epsilon(1e-12));
    CHECK(norm_sq(u) == doctest::Approx(dot(u, u)).epsilon(1e-12));
  }
}

TEST_CASE("parallelogram law on random vectors") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const StackedVector u = random_stacked(rng, 4, 3);
    const StackedVector v = random_stacked(rng, 4, 3);
    const double lhs = norm_sq(u + v) + norm_sq(u - v);
    const double rhs = 2.0 * norm_sq(u) + 2.0 * norm_sq(v);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * rhs);
  }
}

TEST_CASE("rng is reproducible and in range") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs = differs || x != c.uniform();
  }
  CHECK(differs);
}
