#pragma once

#include <complex>
#include <cstddef>
#include <functional>

#include <Eigen/Dense>

namespace feel {

using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Closed search interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] double width() const { return hi - lo; }
};

struct MinimizeResult {
  double argmin = 0.0;
  double min_value = 0.0;
  std::size_t iterations = 0;
};

namespace numerics {

/// φ = (3 − √5)/2, the golden-section shrink ratio.
inline constexpr double kGoldenRatio = 0.38196601125010515;
inline constexpr double kDefaultGoldenTol = 1e-6;
inline constexpr std::size_t kDefaultGoldenMaxIter = 1000;

/// Principal branch W0 of the Lambert-W function, x >= -1/e.
/// Throws DomainError below the branch point.
double lambert_w0(double x);

/// Lower branch W-1 of the Lambert-W function, -1/e <= x < 0.
double lambert_wm1(double x);

/// Golden-section minimisation of a unimodal function on `bounds`.
///
/// Probes sit at a + φ(b − a) and a + (1 − φ)(b − a). When the left probe
/// is lower the right end moves in, otherwise the left end does. Iteration
/// stops once b − a <= tol or after max_iter shrinks; the best of the two
/// final probes and the original endpoints is returned. Non-finite values
/// (+inf) are allowed and count as worse than any finite value.
MinimizeResult golden_section_min(const std::function<double(double)>& f, Interval bounds,
                                  double tol = kDefaultGoldenTol,
                                  std::size_t max_iter = kDefaultGoldenMaxIter);

/// Unit-norm maximiser of the generalised Rayleigh quotient
/// |aᴴw|² / (wᴴ R w) for Hermitian positive-definite R, i.e. w ∝ R⁻¹a.
ComplexVector max_generalized_eigvec(const ComplexVector& a, const ComplexMatrix& r);

/// |aᴴw|² / (wᴴ R w).
double rayleigh_quotient(const ComplexVector& a, const ComplexMatrix& r, const ComplexVector& w);

}  // namespace numerics
}  // namespace feel
