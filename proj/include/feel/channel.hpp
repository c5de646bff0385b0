#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "feel/numerics.hpp"
#include "feel/rng.hpp"

namespace feel {

/// Large-scale and small-scale parameters of the simulated uplink.
struct ChannelModel {
  double pathloss_exponent = 3.2;
  double rician_k_db = 8.0;
  int antennas = 4;
};

struct ChannelRealization {
  ComplexVector h;
  std::uint32_t worker_id = 0;
  std::uint32_t round = 0;
};

/// Receive beam and the effective gain it achieves. `beta` is the
/// post-beamforming SINR per watt before the bandwidth factor, so the link
/// SINR at power P over bandwidth W is beta·P/W.
struct BeamState {
  ComplexVector w;
  double beta = 0.0;
};

namespace channel {

double db_to_linear(double db);

/// Rician block-fading draw with distance path loss:
/// h = sqrt(d^-n)·(sqrt(K/(K+1))·a(ψ) + sqrt(1/(K+1))·g), where a(ψ) has
/// entries exp(iπ·m·sin ψ) and g is i.i.d. CN(0, 1).
ComplexVector sample_channel(RngStream& rng, double distance_m, const ChannelModel& model,
                             double los_angle_rad = 0.0);

/// Interference-plus-noise covariance Σ h'h'ᴴ + σ²I.
ComplexMatrix interference_covariance(std::span<const ComplexVector> interferers, double noise_power,
                                      Eigen::Index antennas);

BeamState beam_and_gain(const ComplexVector& target, std::span<const ComplexVector> interferers,
                        double noise_power);

/// Achievable rate in bit/s: W·log2(1 + beta·P/W).
double uplink_rate(double bandwidth_hz, double beta, double power_w);

}  // namespace channel
}  // namespace feel
