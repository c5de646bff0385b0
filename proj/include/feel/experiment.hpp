#pragma once

#include <vector>

#include "feel/config.hpp"
#include "feel/federation.hpp"
#include "feel/learning.hpp"

namespace feel::experiment {

/// Dataset named by the config. Synthetic data depends only on the seed, so
/// every trial of a run sees the same samples.
LabeledDataset load_data(const ExperimentConfig& config);

/// All trials of a run; trial t uses federation::trial_seed(seed, t).
std::vector<std::vector<RoundRecord>> run_trials(const ExperimentConfig& config, const LabeledDataset& data);

}  // namespace feel::experiment
