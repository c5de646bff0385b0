#pragma once

// Slow, independent re-derivations used to check the library. Nothing here
// calls the code path it is meant to check.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "feel/federation.hpp"
#include "feel/numerics.hpp"
#include "feel/resource.hpp"
#include "feel/rng.hpp"

namespace feel::oracle {

/// Plain Newton iteration on w·e^w − x = 0, started at log1p(x), or from the
/// branch-point expansion when x < −0.3.
double lambert_w0_newton(double x);

struct GridMin {
  double argmin = 0.0;
  double min_value = 0.0;
};

/// Uniform grid of `points` samples on [lo, hi], endpoints included.
GridMin grid_argmin(const std::function<double(double)>& f, double lo, double hi, std::size_t points);

/// t·W·(2^(ξ/(t·W)) − 1)/β evaluated with pow.
double upload_energy(double t_up, double bandwidth_hz, double beta, double model_bits);

/// [max(1e-12, T − ρ/f_min), T − ρ/f_max] from first principles.
Interval upload_interval(const Workload& w, double deadline, const DeviceBounds& bounds);

/// Energy of one round as a function of the upload slot: compute at
/// f = max(ρ/(T − t), f_min); power from the rate equation, +inf above p_max,
/// p_min for the shorter airtime below it.
double round_energy(const Workload& w, double deadline, double bandwidth_hz, double beta,
                    const DeviceBounds& bounds, double t_up);

/// Smallest W on a log grid over [lo, hi] with W·log2(1 + βP/W) >= ξ/t,
/// refined by bisection against its grid neighbour. +inf if none qualifies.
double min_bandwidth_grid(double t, double power_w, double beta, double model_bits, double lo, double hi,
                          std::size_t points);

/// |aᴴw|² / (wᴴRw) with explicit loops.
double quotient(const ComplexVector& a, const ComplexMatrix& r, const ComplexVector& w);

/// Best quotient over `samples` isotropic random unit beams.
double best_random_beam(const ComplexVector& a, const ComplexMatrix& r, std::size_t samples, RngStream& rng);

/// Largest eigenvalue of the pencil (aaᴴ, R), which is the maximal quotient.
double max_quotient(const ComplexVector& a, const ComplexMatrix& r);

/// Cross-entropy of a flat parameter vector laid out like
/// ModelParameters::flatten().
double reference_loss(const std::vector<std::size_t>& architecture, std::span<const double> theta,
                      const Eigen::VectorXd& x, int label);

/// Central differences of reference_loss with the given step.
std::vector<double> finite_difference_gradient(const std::vector<std::size_t>& architecture,
                                               std::vector<double> theta, const Eigen::VectorXd& x, int label,
                                               double step);

/// Plain synchronous FedAvg without filtering, energy accounting or
/// deadlines, drawing selections and shuffles from the same streams as the
/// federation code. Returns the flattened global model after each round.
std::vector<std::vector<double>> fedavg_reference(const FederationState& initial, const RoundConfig& config,
                                                  std::uint32_t rounds);

}  // namespace feel::oracle
