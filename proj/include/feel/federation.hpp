#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "feel/channel.hpp"
#include "feel/learning.hpp"
#include "feel/resource.hpp"
#include "feel/rng.hpp"

namespace feel {

enum class BandwidthMode { kEqualSplit, kMinBandwidthSplit };
enum class Strategy { kOptimized, kNaive };
enum class ChannelMode { kBlockFading, kStatic };
enum class PartitionScheme { kIid, kNonIid };

/// Per-round protocol and radio settings shared by all workers.
struct RoundConfig {
  /// Round deadline T in seconds; <= 0 selects the automatic rule.
  double deadline_s = 0.0;
  double deadline_slack = 1.5;
  double select_fraction = 0.1;
  double threshold = 1.0;  // ϑ
  std::uint32_t epochs = 5;
  std::size_t batch_size = 20;
  double learning_rate = 0.001;
  double bandwidth_hz = 10e6;
  double noise_power = 1e-8;
  double cycles_per_sample = 20.0;
  BandwidthMode bandwidth_mode = BandwidthMode::kEqualSplit;
  Strategy strategy = Strategy::kOptimized;
  ChannelModel channel;
  ChannelMode channel_mode = ChannelMode::kBlockFading;
  OptimizerOptions optimizer;
  unsigned threads = 1;
};

/// How the worker population is built from a dataset.
struct PopulationConfig {
  std::size_t workers = 20;
  PartitionScheme partition = PartitionScheme::kIid;
  std::size_t classes_per_worker = 2;
  double test_fraction = 0.2;
  double distance_min_m = 25.0;
  double distance_max_m = 100.0;
  DeviceBounds bounds;
  /// Hidden layer widths; input and output widths come from the data.
  std::vector<std::size_t> hidden = {16};
};

struct WorkerProfile {
  std::uint32_t id = 0;
  LabeledDataset dataset;
  DeviceBounds bounds;
  double distance_m = 0.0;
  double los_angle_rad = 0.0;
  double remaining_energy = 0.0;
};

enum class WorkerStatus { kOk, kInfeasibleDeadline, kInfeasiblePower, kBudgetExceeded };

std::string to_string(WorkerStatus status);

struct WorkerRoundRecord {
  std::uint32_t id = 0;
  std::size_t dataset_size = 0;
  std::size_t kappa = 0;
  double e_cmp = 0.0;  // charged
  double e_up = 0.0;   // charged
  double t_cmp = 0.0;
  double t_up = 0.0;
  double f_cmp = 0.0;
  double p_up = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
  WorkerStatus status = WorkerStatus::kOk;

  [[nodiscard]] bool feasible() const { return status == WorkerStatus::kOk; }
};

struct RoundRecord {
  std::uint32_t round = 0;
  double deadline = 0.0;
  std::vector<WorkerRoundRecord> per_worker;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double instantaneous_energy = 0.0;
  double cumulative_energy = 0.0;
  double excluded_fraction = 0.0;
  /// True when no update survived and the global model was left unchanged.
  bool no_updates = false;
};

struct FederationState {
  std::uint64_t seed = 0;
  std::vector<WorkerProfile> workers;
  LabeledDataset test_set;
  ModelParameters global;
  double deadline = 0.0;
  double cumulative_energy = 0.0;
};

namespace federation {

/// Random near-equal disjoint split; part sizes differ by at most one.
std::vector<LabeledDataset> partition_iid(const LabeledDataset& data, std::size_t k_workers, RngStream& rng);

/// Label-sharded split. Samples are grouped by class and cut into
/// k·classes_per_worker shards spread as evenly as possible over classes;
/// every worker receives shards of distinct classes.
std::vector<LabeledDataset> partition_noniid(const LabeledDataset& data, std::size_t k_workers,
                                             std::size_t classes_per_worker, RngStream& rng);

/// ⌈fraction·K⌉ distinct ids drawn uniformly, returned sorted.
std::vector<std::uint32_t> select_workers(std::size_t k_workers, double fraction, RngStream& rng);

/// Splits off the test set, partitions the remainder and draws worker
/// geometry and the initial model. Sets the deadline (automatic rule when
/// config.deadline_s <= 0).
FederationState initialize(const LabeledDataset& data, const PopulationConfig& population,
                           const RoundConfig& config, std::uint64_t seed);

/// slack × (largest full-data compute time at f_max + upload time at p_max
/// with equal-split bandwidth and the median interference-free gain).
double default_deadline(const FederationState& state, const RoundConfig& config);

/// Channel realisation of one worker in one round.
ComplexVector worker_channel(const FederationState& state, const WorkerProfile& worker,
                             const RoundConfig& config, std::uint32_t round);

/// One synchronous round: select, train with filtering, beamform, plan,
/// charge energy, aggregate surviving updates, evaluate.
RoundRecord run_round(FederationState& state, const RoundConfig& config, std::uint32_t round);

/// Rounds 1..R on a fresh state.
std::vector<RoundRecord> run_experiment(const LabeledDataset& data, const PopulationConfig& population,
                                        const RoundConfig& config, std::uint32_t rounds, std::uint64_t seed);

/// Seed used by trial t of a multi-trial run; trial 0 uses `seed` itself.
std::uint64_t trial_seed(std::uint64_t seed, std::uint32_t trial);

/// Round-wise mean of the global metrics of several trials.
std::vector<RoundRecord> mean_curve(const std::vector<std::vector<RoundRecord>>& trials);

}  // namespace federation
}  // namespace feel
