#include "feel/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "feel/errors.hpp"

namespace feel::channel {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

ComplexVector sample_channel(RngStream& rng, double distance_m, const ChannelModel& model,
                             double los_angle_rad) {
  if (!(distance_m > 0.0) || model.antennas < 1) {
    throw DomainError("sample_channel: distance must be positive and antennas >= 1");
  }
  const double k = db_to_linear(model.rician_k_db);
  const double los_weight = std::isinf(k) ? 1.0 : std::sqrt(k / (k + 1.0));
  const double nlos_weight = std::isinf(k) ? 0.0 : std::sqrt(1.0 / (k + 1.0));
  const double amplitude = std::sqrt(std::pow(distance_m, -model.pathloss_exponent));

  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  const double phase_step = std::numbers::pi * std::sin(los_angle_rad);
  ComplexVector h(model.antennas);
  for (int m = 0; m < model.antennas; ++m) {
    const std::complex<double> los = std::polar(1.0, phase_step * m);
    const double re = gauss(rng);
    const double im = gauss(rng);
    h(m) = amplitude * (los_weight * los + nlos_weight * std::complex<double>(re, im));
  }
  return h;
}

ComplexMatrix interference_covariance(std::span<const ComplexVector> interferers, double noise_power,
                                      Eigen::Index antennas) {
  ComplexMatrix r = ComplexMatrix::Identity(antennas, antennas) * noise_power;
  for (const auto& g : interferers) {
    if (g.size() != antennas) {
      throw DimensionMismatchError("interference_covariance: interferer antenna count mismatch");
    }
    r.noalias() += g * g.adjoint();
  }
  return r;
}

BeamState beam_and_gain(const ComplexVector& target, std::span<const ComplexVector> interferers,
                        double noise_power) {
  if (!(noise_power > 0.0)) {
    throw DomainError("beam_and_gain: noise power must be positive");
  }
  const ComplexMatrix r = interference_covariance(interferers, noise_power, target.size());
  BeamState state;
  state.w = numerics::max_generalized_eigvec(target, r);
  state.beta = numerics::rayleigh_quotient(target, r, state.w);
  return state;
}

double uplink_rate(double bandwidth_hz, double beta, double power_w) {
  return bandwidth_hz * std::log1p(beta * power_w / bandwidth_hz) / std::numbers::ln2;
}

}  // namespace feel::channel
