#include "feel/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "feel/errors.hpp"

namespace feel::numerics {
namespace {

constexpr double kInvE = 1.0 / std::numbers::e;
constexpr int kHalleyMaxIter = 64;

// Series about the branch point -1/e in p = ±sqrt(2(e·x + 1)).
double branch_point_guess(double x, double sign) {
  const double p = sign * std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * x + 1.0)));
  return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
}

double halley(double x, double w) {
  for (int i = 0; i < kHalleyMaxIter; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) {
      break;
    }
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0 || !std::isfinite(denom)) {
      break;
    }
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(w))) {
      break;
    }
  }
  return w;
}

}  // namespace

double lambert_w0(double x) {
  if (std::isnan(x) || x < -kInvE) {
    // -1/e itself is not exactly representable; accept one ulp below it.
    if (x >= std::nextafter(-kInvE, -1.0)) {
      return -1.0;
    }
    throw DomainError("lambert_w0: argument " + std::to_string(x) + " is below -1/e");
  }
  if (x == 0.0) {
    return 0.0;
  }
  if (std::isinf(x)) {
    return x;
  }
  double w;
  if (x < -0.3) {
    w = branch_point_guess(x, 1.0);
  } else if (x < std::numbers::e) {
    w = std::log1p(x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  return halley(x, w);
}

double lambert_wm1(double x) {
  if (std::isnan(x) || x >= 0.0 || x < -kInvE) {
    if (x < -kInvE && x >= std::nextafter(-kInvE, -1.0)) {
      return -1.0;
    }
    throw DomainError("lambert_wm1: argument " + std::to_string(x) + " outside [-1/e, 0)");
  }
  double w;
  if (x < -0.25) {
    w = branch_point_guess(x, -1.0);
  } else {
    const double l1 = std::log(-x);
    const double l2 = std::log(-l1);
    w = l1 - l2 + l2 / l1;
  }
  return halley(x, w);
}

MinimizeResult golden_section_min(const std::function<double(double)>& f, Interval bounds,
                                  double tol, std::size_t max_iter) {
  if (!(bounds.lo <= bounds.hi)) {
    throw InvalidIntervalError("golden_section_min: lo > hi");
  }
  if (bounds.lo == bounds.hi) {
    return {bounds.lo, f(bounds.lo), 0};
  }

  double a = bounds.lo;
  double b = bounds.hi;
  double x1 = a + kGoldenRatio * (b - a);
  double x2 = a + (1.0 - kGoldenRatio) * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);

  std::size_t i = 0;
  while (std::abs(b - a) > tol && i < max_iter) {
    ++i;
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = a + kGoldenRatio * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + (1.0 - kGoldenRatio) * (b - a);
      f2 = f(x2);
    }
  }
  MinimizeResult best = f1 < f2 ? MinimizeResult{x1, f1, i} : MinimizeResult{x2, f2, i};
  // A minimum sitting on the boundary is only approached by the probes.
  for (const double edge : {bounds.lo, bounds.hi}) {
    const double fe = f(edge);
    if (fe < best.min_value) best = {edge, fe, i};
  }
  return best;
}

double rayleigh_quotient(const ComplexVector& a, const ComplexMatrix& r, const ComplexVector& w) {
  const std::complex<double> num = a.dot(w);  // aᴴw
  const std::complex<double> den = w.dot(r * w);
  return std::norm(num) / den.real();
}

ComplexVector max_generalized_eigvec(const ComplexVector& a, const ComplexMatrix& r) {
  if (r.rows() != r.cols() || r.rows() != a.size() || a.size() == 0) {
    throw DimensionMismatchError("max_generalized_eigvec: matrix is " + std::to_string(r.rows()) +
                                 "x" + std::to_string(r.cols()) + ", vector has " +
                                 std::to_string(a.size()) + " entries");
  }
  Eigen::LLT<ComplexMatrix> llt(r);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrixError("max_generalized_eigvec: matrix is not Hermitian positive definite");
  }
  ComplexVector w = llt.solve(a);
  const double norm = w.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw SingularMatrixError("max_generalized_eigvec: solve produced a degenerate vector");
  }
  return w / norm;
}

}  // namespace feel::numerics
