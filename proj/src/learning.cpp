#include "feel/learning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <string>

#include "feel/errors.hpp"

namespace feel {
namespace {

std::size_t expected_parameter_count(const std::vector<std::size_t>& arch) {
  std::size_t n = 0;
  for (std::size_t l = 1; l < arch.size(); ++l) {
    n += arch[l] * arch[l - 1] + arch[l];
  }
  return n;
}

void check_architecture(const std::vector<std::size_t>& arch) {
  if (arch.size() < 2 || std::any_of(arch.begin(), arch.end(), [](std::size_t w) { return w == 0; })) {
    throw DimensionMismatchError("model architecture needs at least two non-zero widths");
  }
}

}  // namespace

ModelParameters::ModelParameters(std::vector<std::size_t> architecture)
    : architecture_(std::move(architecture)) {
  check_architecture(architecture_);
  layers_.reserve(architecture_.size() - 1);
  for (std::size_t l = 1; l < architecture_.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(architecture_[l]);
    const auto in = static_cast<Eigen::Index>(architecture_[l - 1]);
    layers_.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

ModelParameters ModelParameters::random(std::vector<std::size_t> architecture, RngStream& rng) {
  ModelParameters model(std::move(architecture));
  for (auto& layer : model.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = dist(rng);
      }
    }
  }
  return model;
}

std::size_t ModelParameters::parameter_count() const { return expected_parameter_count(architecture_); }

double ModelParameters::model_bits() const { return static_cast<double>(parameter_count()) * 64.0; }

std::vector<double> ModelParameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        flat.push_back(layer.weights(r, c));
      }
    }
    flat.insert(flat.end(), layer.biases.data(), layer.biases.data() + layer.biases.size());
  }
  return flat;
}

ModelParameters ModelParameters::from_flat(std::vector<std::size_t> architecture, std::span<const double> flat) {
  ModelParameters model(std::move(architecture));
  if (flat.size() != model.parameter_count()) {
    throw DimensionMismatchError("from_flat: expected " + std::to_string(model.parameter_count()) +
                                 " values, got " + std::to_string(flat.size()));
  }
  std::size_t k = 0;
  for (auto& layer : model.layers_) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        layer.weights(r, c) = flat[k++];
      }
    }
    for (Eigen::Index r = 0; r < layer.biases.size(); ++r) {
      layer.biases(r) = flat[k++];
    }
  }
  return model;
}

std::vector<std::uint8_t> ModelParameters::serialize() const {
  const auto flat = flatten();
  std::vector<std::uint8_t> bytes(flat.size() * sizeof(double));
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(flat[i]);
    for (std::size_t b = 0; b < 8; ++b) {
      bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  return bytes;
}

ModelParameters ModelParameters::deserialize(std::vector<std::size_t> architecture,
                                             std::span<const std::uint8_t> bytes) {
  check_architecture(architecture);
  const std::size_t count = expected_parameter_count(architecture);
  if (bytes.size() != count * 8) {
    throw FormatError("deserialize: expected " + std::to_string(count * 8) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  std::vector<double> flat(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
    }
    flat[i] = std::bit_cast<double>(bits);
  }
  return from_flat(std::move(architecture), flat);
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.features.col(static_cast<Eigen::Index>(i)) = features.col(static_cast<Eigen::Index>(indices[i]));
    out.labels.push_back(labels[indices[i]]);
  }
  return out;
}

namespace learning {
namespace {

void check_input(const ModelParameters& model, Eigen::Index rows) {
  if (static_cast<std::size_t>(rows) != model.input_width()) {
    throw DimensionMismatchError("input has " + std::to_string(rows) + " features, model expects " +
                                 std::to_string(model.input_width()));
  }
}

void check_label(int label, Eigen::Index classes) {
  if (label < 0 || label >= classes) {
    throw DimensionMismatchError("label " + std::to_string(label) + " outside [0, " +
                                 std::to_string(classes) + ")");
  }
}

// Column-wise logits for a batch.
Eigen::MatrixXd batch_logits(const ModelParameters& model, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd a = x;
  const auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = layers[l].weights * a;
    z.colwise() += layers[l].biases;
    if (l + 1 < layers.size()) {
      a = z.cwiseMax(0.0);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

void softmax_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    auto col = z.col(j);
    col.array() -= col.maxCoeff();
    col = col.array().exp().matrix();
    col /= col.sum();
  }
}

}  // namespace

Eigen::VectorXd logits(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  check_input(model, x.rows());
  return batch_logits(model, x);
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& z) {
  Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp().matrix();
  return p / p.sum();
}

Eigen::VectorXd forward(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return softmax(logits(model, x));
}

double cross_entropy_loss(const Eigen::Ref<const Eigen::VectorXd>& p, int label) {
  check_label(label, p.size());
  return -std::log(std::max(p(label), kLogFloor));
}

double cross_entropy_from_logits(const Eigen::Ref<const Eigen::VectorXd>& z, int label) {
  check_label(label, z.size());
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return lse - z(label);
}

Eigen::VectorXd output_gradient(const Eigen::Ref<const Eigen::VectorXd>& p, int label) {
  check_label(label, p.size());
  Eigen::VectorXd g = p;
  g(label) -= 1.0;
  return g;
}

double sample_loss(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x, int label) {
  return cross_entropy_from_logits(logits(model, x), label);
}

ModelParameters batch_gradient(const ModelParameters& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                               std::span<const int> labels) {
  check_input(model, x.rows());
  if (static_cast<std::size_t>(x.cols()) != labels.size() || labels.empty()) {
    throw DimensionMismatchError("batch_gradient: feature/label count mismatch");
  }
  const auto& layers = model.layers();
  const std::size_t depth = layers.size();

  // Forward pass keeping pre-activations and activations.
  std::vector<Eigen::MatrixXd> activations;
  std::vector<Eigen::MatrixXd> pre;
  activations.reserve(depth + 1);
  pre.reserve(depth);
  activations.emplace_back(x);
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::MatrixXd z = layers[l].weights * activations.back();
    z.colwise() += layers[l].biases;
    pre.push_back(z);
    if (l + 1 < depth) {
      activations.emplace_back(z.cwiseMax(0.0));
    } else {
      activations.emplace_back(std::move(z));
    }
  }

  Eigen::MatrixXd delta = activations.back();
  softmax_columns(delta);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    check_label(labels[j], delta.rows());
    delta(labels[j], static_cast<Eigen::Index>(j)) -= 1.0;
  }
  delta /= static_cast<double>(labels.size());

  ModelParameters grad(model.architecture());
  for (std::size_t l = depth; l-- > 0;) {
    grad.layers()[l].weights.noalias() = delta * activations[l].transpose();
    grad.layers()[l].biases = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = layers[l].weights.transpose() * delta;
      delta = (pre[l - 1].array() > 0.0).select(back, 0.0);
    }
  }
  return grad;
}

ModelParameters sample_gradient(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                int label) {
  const int labels[] = {label};
  return batch_gradient(model, x, labels);
}

void apply_gradient(ModelParameters& model, const ModelParameters& grad, double lr) {
  if (!model.same_architecture(grad)) {
    throw DimensionMismatchError("apply_gradient: architecture mismatch");
  }
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    model.layers()[l].weights -= lr * grad.layers()[l].weights;
    model.layers()[l].biases -= lr * grad.layers()[l].biases;
  }
}

ModelParameters sgd_epoch(ModelParameters model, const LabeledDataset& data,
                          std::span<const std::size_t> indices, std::size_t batch_size, double lr,
                          RngStream& rng) {
  if (indices.empty()) {
    return model;
  }
  if (batch_size == 0) {
    throw DomainError("sgd_epoch: batch size must be at least 1");
  }
  std::vector<std::size_t> order(indices.begin(), indices.end());
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::MatrixXd x;
  std::vector<int> y;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, order.size() - start);
    x.resize(data.features.rows(), static_cast<Eigen::Index>(n));
    y.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto idx = static_cast<Eigen::Index>(order[start + j]);
      x.col(static_cast<Eigen::Index>(j)) = data.features.col(idx);
      y[j] = data.labels[order[start + j]];
    }
    apply_gradient(model, batch_gradient(model, x, y), lr);
  }
  return model;
}

FilterDecision filter_samples(const ModelParameters& model, const LabeledDataset& data, double threshold) {
  FilterDecision decision;
  if (data.empty()) {
    return decision;
  }
  check_input(model, data.features.rows());
  Eigen::MatrixXd p = batch_logits(model, data.features);
  softmax_columns(p);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (p.col(static_cast<Eigen::Index>(i)).maxCoeff() <= threshold) {
      decision.included_indices.push_back(i);
    }
  }
  decision.excluded_count = data.size() - decision.included_indices.size();
  return decision;
}

LocalRoundResult local_round(const ModelParameters& global, const LabeledDataset& data, std::uint32_t epochs,
                             std::size_t batch_size, double lr, double threshold, RngStream& rng) {
  if (epochs < 1) {
    throw DomainError("local_round: at least one epoch is required");
  }
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  LocalRoundResult result;
  result.model = sgd_epoch(global, data, all, batch_size, lr, rng);
  result.filter = filter_samples(result.model, data, threshold);
  for (std::uint32_t e = 1; e < epochs; ++e) {
    result.model = sgd_epoch(std::move(result.model), data, result.filter.included_indices, batch_size, lr, rng);
  }
  return result;
}

ModelParameters aggregate(std::span<const WeightedUpdate> updates) {
  if (updates.empty()) {
    throw DomainError("aggregate: no updates");
  }
  double total = 0.0;
  for (const auto& u : updates) {
    if (!u.model->same_architecture(*updates.front().model)) {
      throw DimensionMismatchError("aggregate: architecture mismatch");
    }
    total += static_cast<double>(u.dataset_size);
  }
  if (!(total > 0.0)) {
    throw DomainError("aggregate: total dataset size is zero");
  }
  ModelParameters out(updates.front().model->architecture());
  for (const auto& u : updates) {
    const double weight = static_cast<double>(u.dataset_size) / total;
    for (std::size_t l = 0; l < out.layers().size(); ++l) {
      out.layers()[l].weights += weight * u.model->layers()[l].weights;
      out.layers()[l].biases += weight * u.model->layers()[l].biases;
    }
  }
  return out;
}

Evaluation evaluate(const ModelParameters& model, const LabeledDataset& data) {
  if (data.empty()) {
    throw DomainError("evaluate: empty dataset");
  }
  check_input(model, data.features.rows());
  const Eigen::MatrixXd z = batch_logits(model, data.features);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto col = z.col(static_cast<Eigen::Index>(i));
    loss += cross_entropy_from_logits(col, data.labels[i]);
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < col.size(); ++c) {
      if (col(c) > col(best)) {
        best = c;
      }
    }
    if (best == data.labels[i]) {
      ++correct;
    }
  }
  const double n = static_cast<double>(data.size());
  return {loss / n, static_cast<double>(correct) / n};
}

}  // namespace learning
}  // namespace feel
