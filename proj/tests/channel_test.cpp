#include <cmath>
#include <vector>

#include "doctest.h"

#include "feel/channel.hpp"
#include "feel/rng.hpp"

using namespace feel;

TEST_CASE("pure LOS channel has path-loss amplitude on every antenna") {
  ChannelModel model;
  model.rician_k_db = 90.0;
  auto rng = derive_stream(7, StreamTag::kChannel, {1});
  const ComplexVector h = channel::sample_channel(rng, 40.0, model);
  const double amp = std::sqrt(std::pow(40.0, -model.pathloss_exponent));
  for (Eigen::Index m = 0; m < h.size(); ++m) CHECK(std::abs(h(m)) == doctest::Approx(amp).epsilon(1e-4));
}

TEST_CASE("path loss scales the same draw") {
  ChannelModel model;
  auto r1 = derive_stream(9, StreamTag::kChannel, {2});
  auto r2 = derive_stream(9, StreamTag::kChannel, {2});
  const double p25 = channel::sample_channel(r1, 25.0, model).squaredNorm();
  const double p100 = channel::sample_channel(r2, 100.0, model).squaredNorm();
  CHECK(p25 / p100 == doctest::Approx(std::pow(25.0 / 100.0, -3.2)).epsilon(1e-12));
}

TEST_CASE("scalar gain without interference") {
  ComplexVector h(1);
  h << 2e-3;
  const BeamState b = channel::beam_and_gain(h, {}, 1e-8);
  CHECK(b.beta == doctest::Approx(400.0).epsilon(1e-12));
}

TEST_CASE("interference lowers the gain") {
  ComplexVector h(2);
  h << std::complex<double>(1e-3, 2e-4), std::complex<double>(-3e-4, 5e-4);
  const double clean = channel::beam_and_gain(h, {}, 1e-8).beta;
  const std::vector<ComplexVector> same{h};
  CHECK(channel::beam_and_gain(h, same, 1e-8).beta < clean);
}

TEST_CASE("uplink rate") {
  CHECK(channel::uplink_rate(1e6, 1e8, 0.0) == 0.0);
  CHECK(channel::uplink_rate(1e6, 1e8, 0.01) == doctest::Approx(1e6).epsilon(1e-14));
  CHECK(channel::db_to_linear(10.0) == doctest::Approx(10.0));
}
