#include <cmath>
#include <vector>

#include "doctest.h"

#include "feel/learning.hpp"
#include "feel/rng.hpp"

using namespace feel;
using namespace feel::learning;

namespace {

LabeledDataset two_points() {
  LabeledDataset d;
  d.features.resize(2, 2);
  d.features << 1.0, -1.0, 0.5, -0.5;
  d.labels = {0, 1};
  d.num_classes = 2;
  return d;
}

}  // namespace

TEST_CASE("softmax") {
  const Eigen::VectorXd p = softmax(Eigen::VectorXd::Constant(4, 3.0));
  for (Eigen::Index c = 0; c < 4; ++c) CHECK(p(c) == doctest::Approx(0.25).epsilon(1e-15));
  Eigen::VectorXd z = Eigen::VectorXd::Zero(3);
  z(0) = 800.0;
  const Eigen::VectorXd q = softmax(z);
  CHECK(q(0) == 1.0);
  CHECK(q(1) < 1e-300);

  auto rng = derive_stream(3, StreamTag::kModelInit);
  const auto model = ModelParameters::random({5, 7, 3}, rng);
  std::normal_distribution<double> n;
  Eigen::VectorXd x(5);
  for (auto& v : x) v = n(rng);
  CHECK(std::abs(forward(model, x).sum() - 1.0) <= 1e-12);
}

TEST_CASE("cross entropy and output gradient") {
  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(10);
  onehot(4) = 1.0;
  CHECK(cross_entropy_loss(onehot, 4) == 0.0);
  CHECK(cross_entropy_loss(Eigen::VectorXd::Constant(10, 0.1), 3) == doctest::Approx(std::log(10.0)).epsilon(1e-14));

  Eigen::VectorXd p(3);
  p << 0.7, 0.2, 0.1;
  const Eigen::VectorXd g = output_gradient(p, 0);
  CHECK(g(0) == doctest::Approx(-0.3));
  CHECK(g(1) == doctest::Approx(0.2));
  CHECK(g(2) == doctest::Approx(0.1));
  CHECK(output_gradient(onehot, 4).norm() == 0.0);
}

TEST_CASE("apply_gradient steps") {
  ModelParameters m({1, 1});
  ModelParameters g({1, 1});
  m.layers()[0].biases(0) = 0.0;
  g.layers()[0].biases(0) = 0.0 - 3.0;  // d/dθ of ½(θ − 3)² at θ = 0
  apply_gradient(m, g, 0.1);
  CHECK(m.layers()[0].biases(0) == doctest::Approx(0.3).epsilon(1e-15));

  const auto before = m.flatten();
  apply_gradient(m, g, 0.0);
  CHECK(m.flatten() == before);
  apply_gradient(m, ModelParameters({1, 1}), 0.5);
  CHECK(m.flatten() == before);
}

TEST_CASE("filter thresholds") {
  auto rng = derive_stream(5, StreamTag::kModelInit);
  const auto model = ModelParameters::random({2, 4, 2}, rng);
  const auto data = two_points();
  CHECK(filter_samples(model, data, 1.0).excluded_count == 0);
  CHECK(filter_samples(model, data, 0.0).excluded_count == data.size());
}

TEST_CASE("filter excludes exactly the confident sample") {
  // Zero input: the logits are the biases, so the max-prob is set directly.
  auto max_prob_model = [](std::vector<double> p) {
    ModelParameters m({1, p.size()});
    for (std::size_t c = 0; c < p.size(); ++c) m.layers()[0].biases(static_cast<Eigen::Index>(c)) = std::log(p[c]);
    return m;
  };
  LabeledDataset one;
  one.features = Eigen::MatrixXd::Zero(1, 1);
  one.labels = {0};
  one.num_classes = 2;
  CHECK(filter_samples(max_prob_model({0.95, 0.05}), one, 0.8).excluded_count == 1);
  CHECK(filter_samples(max_prob_model({0.6, 0.4}), one, 0.8).excluded_count == 0);
  one.num_classes = 4;
  CHECK(filter_samples(max_prob_model({0.3, 0.25, 0.25, 0.2}), one, 0.8).excluded_count == 0);
}

TEST_CASE("single epoch ignores the filter") {
  auto init = derive_stream(11, StreamTag::kModelInit);
  const auto model = ModelParameters::random({2, 4, 2}, init);
  const auto data = two_points();
  auto r1 = derive_stream(11, StreamTag::kTraining);
  auto r2 = derive_stream(11, StreamTag::kTraining);
  const auto filtered = local_round(model, data, 1, 1, 0.1, 0.0, r1);
  const auto plain = local_round(model, data, 1, 1, 0.1, 1.0, r2);
  CHECK(filtered.model.flatten() == plain.model.flatten());
  CHECK(filtered.filter.excluded_count == data.size());
}

TEST_CASE("aggregate weights") {
  ModelParameters a({1, 1});
  ModelParameters b({1, 1});
  a.layers()[0].weights(0, 0) = 1.0;
  b.layers()[0].weights(0, 0) = 5.0;
  const WeightedUpdate single[] = {{&a, 10}};
  CHECK(aggregate(single).flatten() == a.flatten());
  const WeightedUpdate equal[] = {{&a, 4}, {&b, 4}};
  CHECK(aggregate(equal).layers()[0].weights(0, 0) == 3.0);
  const WeightedUpdate skewed[] = {{&a, 1}, {&b, 3}};
  CHECK(aggregate(skewed).layers()[0].weights(0, 0) == 0.25 * 1.0 + 0.75 * 5.0);
}

TEST_CASE("evaluate") {
  LabeledDataset d;
  d.features = Eigen::MatrixXd::Zero(3, 10);
  for (int i = 0; i < 10; ++i) d.labels.push_back(i % 10 < 3 ? 0 : i);
  d.num_classes = 10;
  const ModelParameters uniform({3, 10});
  const Evaluation e = evaluate(uniform, d);
  CHECK(e.loss == doctest::Approx(std::log(10.0)).epsilon(1e-14));
  CHECK(e.accuracy == doctest::Approx(0.3));

  ModelParameters perfect({1, 2});
  perfect.layers()[0].weights(0, 0) = 1000.0;
  perfect.layers()[0].weights(1, 0) = -1000.0;
  LabeledDataset s;
  s.features.resize(1, 2);
  s.features << 1.0, -1.0;
  s.labels = {0, 1};
  s.num_classes = 2;
  const Evaluation ep = evaluate(perfect, s);
  CHECK(ep.loss == doctest::Approx(0.0));
  CHECK(ep.accuracy == 1.0);
}

TEST_CASE("serialize round trip and size") {
  auto rng = derive_stream(2, StreamTag::kModelInit);
  const auto m = ModelParameters::random({784, 32, 10}, rng);
  const auto bytes = m.serialize();
  CHECK(m.model_bits() == 8.0 * static_cast<double>(bytes.size()));
  CHECK(ModelParameters::deserialize({784, 32, 10}, bytes).flatten() == m.flatten());
}
