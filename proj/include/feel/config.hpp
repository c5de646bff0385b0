#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "feel/federation.hpp"

namespace feel {

enum class DataSourceKind { kSynthetic, kMnist };

struct DataSource {
  DataSourceKind kind = DataSourceKind::kSynthetic;
  std::size_t synthetic_dim = 8;
  std::size_t synthetic_classes = 4;
  std::size_t synthetic_samples = 4000;
  double synthetic_spread = 0.3;
  std::string mnist_images;
  std::string mnist_labels;
  std::size_t mnist_subset = 6000;
};

/// Everything needed to reproduce a run. Powers are kept in dBm as written
/// in the file; population.bounds.p_min/p_max hold the converted watts.
struct ExperimentConfig {
  RoundConfig round;
  PopulationConfig population;
  DataSource data;
  std::uint32_t rounds = 1;
  std::uint64_t seed = 1;
  std::uint32_t trials = 1;
  double p_min_dbm = -10.0;
  double p_max_dbm = 20.0;
  std::string output_dir = "out";
};

namespace config {

double dbm_to_watts(double dbm);

/// Parses and validates a flat JSON object. Throws ConfigError naming the
/// offending line or field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// Throws ConfigError naming the violated constraint.
void validate(const ExperimentConfig& config);

/// Bundled presets. The synthetic ones share everything except ϑ and the
/// planning strategy so their energy curves are paired.
ExperimentConfig mnist_defaults();
ExperimentConfig synthetic_preset(double threshold);
ExperimentConfig synthetic_naive_preset();

}  // namespace config
}  // namespace feel
