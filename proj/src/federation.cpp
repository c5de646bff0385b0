#include "feel/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "feel/errors.hpp"

namespace feel {

std::string to_string(WorkerStatus status) {
  switch (status) {
    case WorkerStatus::kOk:
      return "ok";
    case WorkerStatus::kInfeasibleDeadline:
      return "infeasible_deadline";
    case WorkerStatus::kInfeasiblePower:
      return "infeasible_power";
    case WorkerStatus::kBudgetExceeded:
      return "budget_exceeded";
  }
  return "unknown";
}

namespace federation {
namespace {

std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

// Runs body(i) for i in [0, n) on up to `threads` threads. Each index is
// handled by exactly one thread and writes only its own slot.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += workers) body(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct WorkerWork {
  LocalRoundResult local;
  BeamState beam;
  Workload workload;
  ResourcePlan plan;
  WorkerRoundRecord record;
  bool planned = false;
};

std::uint32_t channel_round(const RoundConfig& config, std::uint32_t round) {
  return config.channel_mode == ChannelMode::kStatic ? 0u : round;
}

// Fills work.plan/record for a bandwidth share. Charges nothing.
void plan_worker(WorkerWork& work, const WorkerProfile& worker, const RoundConfig& config, double deadline,
                 double lambda) {
  DeviceBounds bounds = worker.bounds;
  bounds.energy_budget = worker.remaining_energy;
  const double bandwidth = lambda * config.bandwidth_hz;
  auto& rec = work.record;
  rec.lambda = lambda;
  work.planned = false;
  try {
    work.plan = config.strategy == Strategy::kNaive
                    ? resource::naive_round_plan(work.workload, deadline, bandwidth, work.beam.beta, bounds)
                    : resource::minimize_round_energy(work.workload, deadline, bandwidth, work.beam.beta, bounds,
                                                      config.optimizer);
    work.planned = true;
    rec.status = WorkerStatus::kOk;
  } catch (const BudgetExceededError& e) {
    work.plan = e.plan();
    rec.status = WorkerStatus::kBudgetExceeded;
  } catch (const InfeasibleDeadlineError&) {
    rec.status = WorkerStatus::kInfeasibleDeadline;
  } catch (const InfeasiblePowerError&) {
    rec.status = WorkerStatus::kInfeasiblePower;
  }
}

}  // namespace

std::vector<LabeledDataset> partition_iid(const LabeledDataset& data, std::size_t k_workers, RngStream& rng) {
  if (k_workers == 0 || k_workers > data.size()) {
    throw PartitionError("partition_iid: cannot split " + std::to_string(data.size()) + " samples over " +
                         std::to_string(k_workers) + " workers");
  }
  const auto idx = shuffled_indices(data.size(), rng);
  const std::size_t base = data.size() / k_workers;
  const std::size_t extra = data.size() % k_workers;
  std::vector<LabeledDataset> parts;
  parts.reserve(k_workers);
  std::size_t start = 0;
  for (std::size_t k = 0; k < k_workers; ++k) {
    const std::size_t n = base + (k < extra ? 1 : 0);
    parts.push_back(data.subset(std::span(idx).subspan(start, n)));
    start += n;
  }
  return parts;
}

std::vector<LabeledDataset> partition_noniid(const LabeledDataset& data, std::size_t k_workers,
                                             std::size_t classes_per_worker, RngStream& rng) {
  if (k_workers == 0 || classes_per_worker == 0) {
    throw PartitionError("partition_noniid: need at least one worker and one class per worker");
  }
  std::vector<std::vector<std::size_t>> by_class(data.num_classes);
  for (const std::size_t i : shuffled_indices(data.size(), rng)) {
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  }
  std::vector<std::size_t> classes;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty()) classes.push_back(c);
  }
  if (classes_per_worker > classes.size()) {
    throw PartitionError("partition_noniid: " + std::to_string(classes_per_worker) +
                         " classes per worker but only " + std::to_string(classes.size()) + " classes present");
  }
  std::shuffle(classes.begin(), classes.end(), rng);

  const std::size_t shards = k_workers * classes_per_worker;
  std::vector<std::size_t> shards_per_class(classes.size(), 0);
  if (shards >= classes.size()) {
    for (std::size_t j = 0; j < classes.size(); ++j) {
      shards_per_class[j] = shards / classes.size() + (j < shards % classes.size() ? 1 : 0);
    }
  } else {
    std::fill_n(shards_per_class.begin(), shards, 1);
  }

  // Shards laid out class by class; a class never spans more than k shards,
  // so shards j and j + k always differ in class.
  std::vector<std::vector<std::size_t>> shard_list;
  shard_list.reserve(shards);
  for (std::size_t j = 0; j < classes.size(); ++j) {
    const auto& members = by_class[classes[j]];
    const std::size_t n_shards = shards_per_class[j];
    if (n_shards == 0) continue;
    if (members.size() < n_shards) {
      throw PartitionError("partition_noniid: class " + std::to_string(classes[j]) + " has " +
                           std::to_string(members.size()) + " samples for " + std::to_string(n_shards) + " shards");
    }
    std::size_t start = 0;
    for (std::size_t s = 0; s < n_shards; ++s) {
      const std::size_t n = members.size() / n_shards + (s < members.size() % n_shards ? 1 : 0);
      shard_list.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(start),
                              members.begin() + static_cast<std::ptrdiff_t>(start + n));
      start += n;
    }
  }

  std::vector<std::size_t> owner(k_workers);
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  std::shuffle(owner.begin(), owner.end(), rng);
  std::vector<std::vector<std::size_t>> assigned(k_workers);
  for (std::size_t j = 0; j < shard_list.size(); ++j) {
    auto& dst = assigned[owner[j % k_workers]];
    dst.insert(dst.end(), shard_list[j].begin(), shard_list[j].end());
  }
  std::vector<LabeledDataset> parts;
  parts.reserve(k_workers);
  for (const auto& idx : assigned) {
    parts.push_back(data.subset(idx));
  }
  return parts;
}

std::vector<std::uint32_t> select_workers(std::size_t k_workers, double fraction, RngStream& rng) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("select_workers: fraction must lie in (0, 1]");
  }
  // Guard against 0.1·20 evaluating to 2.0000000000000004.
  const double raw = fraction * static_cast<double>(k_workers);
  auto count = static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw));
  count = std::clamp<std::size_t>(count, 1, k_workers);
  std::vector<std::uint32_t> ids(k_workers);
  std::iota(ids.begin(), ids.end(), 0u);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, k_workers - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

FederationState initialize(const LabeledDataset& data, const PopulationConfig& population,
                           const RoundConfig& config, std::uint64_t seed) {
  FederationState state;
  state.seed = seed;

  auto split_rng = derive_stream(seed, StreamTag::kPartition, {0});
  const auto idx = shuffled_indices(data.size(), split_rng);
  const auto n_test = static_cast<std::size_t>(std::llround(population.test_fraction * static_cast<double>(data.size())));
  state.test_set = data.subset(std::span(idx).first(n_test));
  const LabeledDataset train = data.subset(std::span(idx).subspan(n_test));

  auto part_rng = derive_stream(seed, StreamTag::kPartition, {1});
  auto parts = population.partition == PartitionScheme::kIid
                   ? partition_iid(train, population.workers, part_rng)
                   : partition_noniid(train, population.workers, population.classes_per_worker, part_rng);

  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].empty()) {
      throw PartitionError("worker " + std::to_string(k) + " received no data");
    }
    auto rng = derive_stream(seed, StreamTag::kProfile, {k});
    std::uniform_real_distribution<double> dist(population.distance_min_m, population.distance_max_m);
    std::uniform_real_distribution<double> angle(-std::numbers::pi / 2, std::numbers::pi / 2);
    WorkerProfile w;
    w.id = static_cast<std::uint32_t>(k);
    w.dataset = std::move(parts[k]);
    w.bounds = population.bounds;
    w.distance_m = dist(rng);
    w.los_angle_rad = angle(rng);
    w.remaining_energy = population.bounds.energy_budget;
    state.workers.push_back(std::move(w));
  }

  std::vector<std::size_t> arch{data.dim()};
  arch.insert(arch.end(), population.hidden.begin(), population.hidden.end());
  arch.push_back(data.num_classes);
  auto init_rng = derive_stream(seed, StreamTag::kModelInit);
  state.global = ModelParameters::random(arch, init_rng);

  state.deadline = config.deadline_s > 0.0 ? config.deadline_s : default_deadline(state, config);
  return state;
}

ComplexVector worker_channel(const FederationState& state, const WorkerProfile& worker, const RoundConfig& config,
                             std::uint32_t round) {
  auto rng = derive_stream(state.seed, StreamTag::kChannel, {worker.id, channel_round(config, round)});
  return channel::sample_channel(rng, worker.distance_m, config.channel, worker.los_angle_rad);
}

double default_deadline(const FederationState& state, const RoundConfig& config) {
  std::vector<double> gains;
  double slowest_compute = 0.0;
  for (const auto& w : state.workers) {
    const ComplexVector h = worker_channel(state, w, config, 1);
    gains.push_back(h.squaredNorm() / config.noise_power);
    const Workload full{w.dataset.size(), 0, config.epochs, config.cycles_per_sample, state.global.model_bits()};
    slowest_compute = std::max(slowest_compute, resource::effective_cycles(full) / w.bounds.f_max);
  }
  std::sort(gains.begin(), gains.end());
  const std::size_t n = gains.size();
  const double median = n % 2 == 1 ? gains[n / 2] : 0.5 * (gains[n / 2 - 1] + gains[n / 2]);

  const double raw = config.select_fraction * static_cast<double>(n);
  const auto selected = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(raw - 1e-9 * raw)), 1, n);
  const double bandwidth = config.bandwidth_hz / static_cast<double>(selected);
  const double p_max = state.workers.front().bounds.p_max;
  const double upload = state.global.model_bits() / channel::uplink_rate(bandwidth, median, p_max);
  return config.deadline_slack * (slowest_compute + upload);
}

RoundRecord run_round(FederationState& state, const RoundConfig& config, std::uint32_t round) {
  auto sel_rng = derive_stream(state.seed, StreamTag::kSelection, {round});
  const auto selected = select_workers(state.workers.size(), config.select_fraction, sel_rng);
  const std::size_t n = selected.size();

  std::vector<ComplexVector> channels(n);
  for (std::size_t i = 0; i < n; ++i) {
    channels[i] = worker_channel(state, state.workers[selected[i]], config, round);
  }

  const double model_bits = state.global.model_bits();
  std::vector<WorkerWork> work(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    const WorkerProfile& worker = state.workers[selected[i]];
    auto rng = derive_stream(state.seed, StreamTag::kTraining, {worker.id, round});
    work[i].local = learning::local_round(state.global, worker.dataset, config.epochs, config.batch_size,
                                          config.learning_rate, config.threshold, rng);

    std::vector<ComplexVector> interferers;
    interferers.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) interferers.push_back(channels[j]);
    }
    work[i].beam = channel::beam_and_gain(channels[i], interferers, config.noise_power);
    work[i].workload = Workload{worker.dataset.size(), work[i].local.filter.excluded_count, config.epochs,
                                config.cycles_per_sample, model_bits};
    work[i].record.id = worker.id;
    work[i].record.dataset_size = worker.dataset.size();
    work[i].record.kappa = work[i].local.filter.excluded_count;
    work[i].record.beta = work[i].beam.beta;
    plan_worker(work[i], worker, config, state.deadline, 1.0 / static_cast<double>(n));
  });

  if (config.bandwidth_mode == BandwidthMode::kMinBandwidthSplit && config.strategy == Strategy::kOptimized) {
    // Minimum bandwidth each worker needs at p_max for the upload slot it
    // was just given, renormalised to use the whole band.
    std::vector<double> demand(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!work[i].planned) continue;
      const WorkerProfile& worker = state.workers[selected[i]];
      try {
        demand[i] = resource::min_bandwidth_for_rate(work[i].plan.t_up, worker.bounds.p_max, work[i].beam.beta,
                                                     model_bits);
      } catch (const InfeasibleBandwidthError&) {
        demand[i] = 0.0;
      }
      total += demand[i];
    }
    if (total > 0.0) {
      const auto unplanned = static_cast<std::size_t>(std::count(demand.begin(), demand.end(), 0.0));
      // Workers without a demand keep the equal share; the rest split what is left.
      const double reserved = static_cast<double>(unplanned) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double lambda = demand[i] > 0.0 ? (1.0 - reserved) * demand[i] / total : 1.0 / static_cast<double>(n);
        plan_worker(work[i], state.workers[selected[i]], config, state.deadline, lambda);
      }
    }
  }

  RoundRecord record;
  record.round = round;
  record.deadline = state.deadline;
  std::vector<WeightedUpdate> updates;
  double excluded = 0.0;
  double samples = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    WorkerProfile& worker = state.workers[selected[i]];
    WorkerWork& w = work[i];
    WorkerRoundRecord& rec = w.record;
    excluded += static_cast<double>(rec.kappa);
    samples += static_cast<double>(rec.dataset_size);

    double charged_cmp = 0.0;
    double charged_up = 0.0;
    if (rec.status == WorkerStatus::kOk) {
      charged_cmp = w.plan.e_cmp;
      charged_up = w.plan.e_up;
      updates.push_back({&w.local.model, worker.dataset.size()});
    } else {
      // The local epochs were run, the upload was not.
      const double e = rec.status == WorkerStatus::kBudgetExceeded
                           ? w.plan.e_cmp
                           : resource::computation_energy(w.workload, worker.bounds.f_max,
                                                          worker.bounds.capacitance_alpha);
      charged_cmp = std::min(e, worker.remaining_energy);
    }
    if (w.planned || rec.status == WorkerStatus::kBudgetExceeded) {
      rec.t_cmp = w.plan.t_cmp;
      rec.t_up = w.plan.t_up;
      rec.f_cmp = w.plan.f_cmp;
      rec.p_up = w.plan.p_up;
    }
    rec.e_cmp = charged_cmp;
    rec.e_up = charged_up;
    worker.remaining_energy = std::max(0.0, worker.remaining_energy - (charged_cmp + charged_up));
    record.instantaneous_energy += charged_cmp + charged_up;
    record.per_worker.push_back(rec);
  }

  if (updates.empty()) {
    record.no_updates = true;
  } else {
    state.global = learning::aggregate(updates);
  }
  const Evaluation eval = learning::evaluate(state.global, state.test_set);
  record.test_loss = eval.loss;
  record.test_accuracy = eval.accuracy;
  state.cumulative_energy += record.instantaneous_energy;
  record.cumulative_energy = state.cumulative_energy;
  record.excluded_fraction = samples > 0.0 ? excluded / samples : 0.0;
  return record;
}

std::vector<RoundRecord> run_experiment(const LabeledDataset& data, const PopulationConfig& population,
                                        const RoundConfig& config, std::uint32_t rounds, std::uint64_t seed) {
  FederationState state = initialize(data, population, config, seed);
  std::vector<RoundRecord> records;
  records.reserve(rounds);
  for (std::uint32_t r = 1; r <= rounds; ++r) {
    records.push_back(run_round(state, config, r));
  }
  return records;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint32_t trial) {
  return trial == 0 ? seed : mix64(seed ^ mix64(static_cast<std::uint64_t>(StreamTag::kTrial) + trial));
}

std::vector<RoundRecord> mean_curve(const std::vector<std::vector<RoundRecord>>& trials) {
  if (trials.empty()) return {};
  const std::size_t rounds = trials.front().size();
  std::vector<RoundRecord> mean(rounds);
  const double n = static_cast<double>(trials.size());
  for (std::size_t r = 0; r < rounds; ++r) {
    mean[r].round = trials.front()[r].round;
    mean[r].deadline = trials.front()[r].deadline;
    for (const auto& t : trials) {
      const RoundRecord& rec = t.at(r);
      mean[r].test_loss += rec.test_loss / n;
      mean[r].test_accuracy += rec.test_accuracy / n;
      mean[r].instantaneous_energy += rec.instantaneous_energy / n;
      mean[r].cumulative_energy += rec.cumulative_energy / n;
      mean[r].excluded_fraction += rec.excluded_fraction / n;
    }
  }
  // Keep the mean cumulative curve monotone despite rounding in the sums.
  for (std::size_t r = 1; r < rounds; ++r) {
    mean[r].cumulative_energy = std::max(mean[r].cumulative_energy, mean[r - 1].cumulative_energy);
  }
  return mean;
}

}  // namespace federation
}  // namespace feel
