// feelsim: run energy-aware federated edge learning experiments.
//
//   feelsim run --config PATH [--seed N] [--out DIR]
//   feelsim gen-data --out PATH [--config PATH] [--seed N]
//   feelsim selftest

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "feel/config.hpp"
#include "feel/datasets.hpp"
#include "feel/errors.hpp"
#include "feel/experiment.hpp"
#include "feel/metrics.hpp"
#include "feel/selftest.hpp"

namespace {

int run(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
  feel::ExperimentConfig cfg = feel::config::load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;

  const auto data = feel::experiment::load_data(cfg);
  const auto trials = feel::experiment::run_trials(cfg, data);
  feel::metrics::write_metrics(trials, feel::config::to_json(cfg), cfg.seed, cfg.output_dir);

  const auto& last = trials.front().back();
  std::printf("rounds=%u trials=%u deadline=%.6g s\n", cfg.rounds, cfg.trials, last.deadline);
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const auto& r = trials[t].back();
    std::printf("trial %zu: test_accuracy=%.4f test_loss=%.4f cum_energy_j=%.6g excluded_fraction=%.3f\n", t,
                r.test_accuracy, r.test_loss, r.cumulative_energy, r.excluded_fraction);
  }
  std::printf("wrote %s\n", cfg.output_dir.c_str());
  return 0;
}

int gen_data(const std::string& out, std::optional<std::string> config_path, std::optional<std::uint64_t> seed) {
  feel::ExperimentConfig cfg = config_path ? feel::config::load_config(*config_path) : feel::config::synthetic_preset(0.8);
  if (seed) cfg.seed = *seed;
  if (cfg.data.kind != feel::DataSourceKind::kSynthetic) {
    throw feel::ConfigError("gen-data needs a synthetic data_source");
  }
  const auto data = feel::experiment::load_data(cfg);
  feel::datasets::write_dataset_csv(data, out);
  std::printf("wrote %zu samples (%zu features, %zu classes) to %s\n", data.size(), data.dim(), data.num_classes,
              out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware federated edge learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write CSV metrics");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out", out, "Override the output directory");

  std::string data_out;
  std::optional<std::string> data_config;
  std::optional<std::uint64_t> data_seed;
  auto* gen_cmd = app.add_subcommand("gen-data", "Dump the synthetic dataset as CSV");
  gen_cmd->add_option("--out", data_out, "Output CSV path")->required();
  gen_cmd->add_option("--config", data_config, "Config naming the synthetic dataset")->check(CLI::ExistingFile);
  gen_cmd->add_option("--seed", data_seed, "Override the config seed");

  auto* self_cmd = app.add_subcommand("selftest", "Run every oracle and invariant check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, seed, out);
    if (*gen_cmd) return gen_data(data_out, data_config, data_seed);
    if (*self_cmd) return feel::selftest::run_selftest(std::cout) ? 0 : 1;
  } catch (const feel::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
