#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "feel/rng.hpp"

namespace feel {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out × in
  Eigen::VectorXd biases;   // out
};

/// Fully connected ReLU network with a softmax output. Layer widths are
/// stored input first, e.g. {784, 32, 10}. Also used to hold gradients.
class ModelParameters {
 public:
  ModelParameters() = default;
  /// Zero-initialised parameters for the given widths (at least two).
  explicit ModelParameters(std::vector<std::size_t> architecture);

  /// He-uniform weights, zero biases.
  static ModelParameters random(std::vector<std::size_t> architecture, RngStream& rng);
  static ModelParameters from_flat(std::vector<std::size_t> architecture, std::span<const double> flat);
  /// Inverse of serialize(); throws FormatError on a length mismatch.
  static ModelParameters deserialize(std::vector<std::size_t> architecture,
                                     std::span<const std::uint8_t> bytes);

  [[nodiscard]] const std::vector<std::size_t>& architecture() const { return architecture_; }
  [[nodiscard]] std::vector<DenseLayer>& layers() { return layers_; }
  [[nodiscard]] const std::vector<DenseLayer>& layers() const { return layers_; }
  [[nodiscard]] std::size_t input_width() const { return architecture_.front(); }
  [[nodiscard]] std::size_t num_classes() const { return architecture_.back(); }

  [[nodiscard]] std::size_t parameter_count() const;
  /// Layer order, weights row-major then biases.
  [[nodiscard]] std::vector<double> flatten() const;
  /// flatten() as little-endian IEEE-754 doubles.
  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  /// Upload size ξ: serialized byte length × 8.
  [[nodiscard]] double model_bits() const;

  [[nodiscard]] bool same_architecture(const ModelParameters& other) const {
    return architecture_ == other.architecture_;
  }

 private:
  std::vector<std::size_t> architecture_;
  std::vector<DenseLayer> layers_;
};

/// Features are stored one sample per column (d × n).
struct LabeledDataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::size_t num_classes = 0;

  [[nodiscard]] std::size_t size() const { return labels.size(); }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] bool empty() const { return labels.empty(); }
  [[nodiscard]] LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct FilterDecision {
  std::vector<std::size_t> included_indices;
  std::size_t excluded_count = 0;  // κ
};

struct LocalRoundResult {
  ModelParameters model;
  FilterDecision filter;
};

struct WeightedUpdate {
  const ModelParameters* model = nullptr;
  std::size_t dataset_size = 0;
};

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
};

namespace learning {

/// Numerical guard inside log().
inline constexpr double kLogFloor = 1e-30;

Eigen::VectorXd logits(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Max-shifted softmax.
Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& z);
Eigen::VectorXd forward(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x);

double cross_entropy_loss(const Eigen::Ref<const Eigen::VectorXd>& p, int label);
/// −log softmax(z)_label via log-sum-exp.
double cross_entropy_from_logits(const Eigen::Ref<const Eigen::VectorXd>& z, int label);
/// ∂L/∂z = p − onehot(label).
Eigen::VectorXd output_gradient(const Eigen::Ref<const Eigen::VectorXd>& p, int label);

double sample_loss(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x, int label);

/// Gradient of the mean cross-entropy over the columns of `x`.
ModelParameters batch_gradient(const ModelParameters& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                               std::span<const int> labels);
ModelParameters sample_gradient(const ModelParameters& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                int label);

/// model ← model − lr·grad.
void apply_gradient(ModelParameters& model, const ModelParameters& grad, double lr);

/// One pass of mini-batch SGD over a shuffled copy of `indices`.
ModelParameters sgd_epoch(ModelParameters model, const LabeledDataset& data,
                          std::span<const std::size_t> indices, std::size_t batch_size, double lr,
                          RngStream& rng);

/// Keeps sample d iff max_c p_c(x_d) <= threshold.
FilterDecision filter_samples(const ModelParameters& model, const LabeledDataset& data, double threshold);

/// First epoch on all data, filter with the resulting model, remaining
/// epochs on the kept samples only.
LocalRoundResult local_round(const ModelParameters& global, const LabeledDataset& data, std::uint32_t epochs,
                             std::size_t batch_size, double lr, double threshold, RngStream& rng);

/// Dataset-size-weighted average, accumulated in list order.
ModelParameters aggregate(std::span<const WeightedUpdate> updates);

/// Mean cross-entropy and argmax accuracy (ties go to the lowest class).
Evaluation evaluate(const ModelParameters& model, const LabeledDataset& data);

}  // namespace learning
}  // namespace feel
