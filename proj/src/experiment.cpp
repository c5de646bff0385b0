#include "feel/experiment.hpp"

#include "feel/datasets.hpp"

namespace feel::experiment {

LabeledDataset load_data(const ExperimentConfig& config) {
  auto rng = derive_stream(config.seed, StreamTag::kData);
  const auto& d = config.data;
  if (d.kind == DataSourceKind::kSynthetic) {
    return datasets::generate_synthetic(d.synthetic_dim, d.synthetic_classes, d.synthetic_samples,
                                        d.synthetic_spread, rng);
  }
  return datasets::load_mnist_idx(d.mnist_images, d.mnist_labels, d.mnist_subset, rng);
}

std::vector<std::vector<RoundRecord>> run_trials(const ExperimentConfig& config, const LabeledDataset& data) {
  std::vector<std::vector<RoundRecord>> trials;
  trials.reserve(config.trials);
  for (std::uint32_t t = 0; t < config.trials; ++t) {
    trials.push_back(federation::run_experiment(data, config.population, config.round, config.rounds,
                                                federation::trial_seed(config.seed, t)));
  }
  return trials;
}

}  // namespace feel::experiment
