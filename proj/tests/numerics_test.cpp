#include <cmath>
#include <complex>

#include "doctest.h"

#include "feel/errors.hpp"
#include "feel/numerics.hpp"

using namespace feel;
using namespace feel::numerics;

TEST_CASE("lambert_w0 fixed points") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lambert_w0(-std::exp(-1.0)) == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK_THROWS_AS(lambert_w0(-0.5), DomainError);
}

TEST_CASE("lambert_wm1 lower branch") {
  const double x = -2.0 * std::exp(-2.0);
  CHECK(lambert_wm1(x) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK_THROWS_AS(lambert_wm1(0.1), DomainError);
}

TEST_CASE("golden section on a parabola") {
  const auto r = golden_section_min([](double x) { return (x - 2.0) * (x - 2.0); }, {0.0, 5.0}, 1e-8);
  CHECK(std::abs(r.argmin - 2.0) <= 1e-6);
  CHECK(r.min_value <= 1e-12);
}

TEST_CASE("golden section degenerate and reversed intervals") {
  const auto r = golden_section_min([](double x) { return x * x; }, {1.5, 1.5});
  CHECK(r.argmin == 1.5);
  CHECK_THROWS_AS(golden_section_min([](double x) { return x; }, {2.0, 1.0}), InvalidIntervalError);
}

TEST_CASE("golden section treats +inf as worse") {
  const auto f = [](double x) { return x < 1.0 ? INFINITY : (x - 1.0); };
  const auto r = golden_section_min(f, {0.0, 4.0}, 1e-10);
  CHECK(std::isfinite(r.min_value));
  CHECK(r.argmin == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("generalized eigenvector: scalar and MRC cases") {
  ComplexVector a(1);
  a << 1.0;
  ComplexMatrix r = ComplexMatrix::Identity(1, 1) * 1e-8;
  const ComplexVector w = max_generalized_eigvec(a, r);
  CHECK(std::abs(std::abs(w(0)) - 1.0) < 1e-14);

  ComplexVector b(2);
  b << 1.0, std::complex<double>(0.0, 1.0);
  const ComplexVector v = max_generalized_eigvec(b, ComplexMatrix::Identity(2, 2));
  const std::complex<double> overlap = (b.normalized()).dot(v);
  CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rayleigh_quotient(b, ComplexMatrix::Identity(2, 2), v) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("generalized eigenvector rejects bad matrices") {
  ComplexVector a = ComplexVector::Ones(2);
  CHECK_THROWS_AS(max_generalized_eigvec(a, ComplexMatrix::Identity(3, 3)), DimensionMismatchError);
  CHECK_THROWS_AS(max_generalized_eigvec(a, ComplexMatrix::Zero(2, 2)), SingularMatrixError);
}
