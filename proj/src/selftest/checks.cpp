#include "feel/selftest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "feel/channel.hpp"
#include "feel/config.hpp"
#include "feel/datasets.hpp"
#include "feel/errors.hpp"
#include "feel/experiment.hpp"
#include "feel/federation.hpp"
#include "feel/learning.hpp"
#include "feel/metrics.hpp"
#include "feel/numerics.hpp"
#include "feel/oracles.hpp"
#include "feel/resource.hpp"

namespace feel::selftest {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

template <typename... Args>
std::string fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

CheckResult timed(std::string name, double limit_s, const std::function<Outcome()>& body) {
  CheckResult r;
  r.name = std::move(name);
  const auto start = Clock::now();
  try {
    Outcome o = body();
    r.passed = o.passed;
    r.detail = std::move(o.detail);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (limit_s > 0.0 && r.seconds > limit_s) {
    r.passed = false;
    r.detail += fmt("; took %.1f s, limit %.0f s", r.seconds, limit_s);
  }
  return r;
}

constexpr std::uint64_t kCheckSeed = 0x5eedf00dULL;

RngStream check_rng(std::uint64_t id) { return derive_stream(kCheckSeed, StreamTag::kTrial, {id}); }

double uniform(RngStream& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double log_uniform(RngStream& rng, double lo, double hi) {
  return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

std::uint64_t uniform_int(RngStream& rng, std::uint64_t lo, std::uint64_t hi) {
  return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
}

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

ComplexMatrix covariance(const std::vector<ComplexVector>& interferers, double noise, Eigen::Index m) {
  ComplexMatrix r = ComplexMatrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) r(i, i) = noise;
  for (const auto& h : interferers) {
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) r(i, j) += h[i] * std::conj(h[j]);
    }
  }
  return r;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch_dir(const std::string& tag) {
  const auto stamp = Clock::now().time_since_epoch().count();
  auto dir = std::filesystem::temp_directory_path() / ("feel_selftest_" + tag + "_" + std::to_string(stamp));
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::size_t> excluded_set(const FilterDecision& d, std::size_t n) {
  std::vector<std::size_t> out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next < d.included_indices.size() && d.included_indices[next] == i) {
      ++next;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

LabeledDataset gaussian_blobs(std::size_t samples, RngStream& rng) {
  LabeledDataset d;
  d.num_classes = 2;
  d.features.resize(2, static_cast<Eigen::Index>(samples));
  std::normal_distribution<double> n01(0.0, 0.5);
  for (std::size_t i = 0; i < samples; ++i) {
    const int y = static_cast<int>(i % 2);
    d.labels.push_back(y);
    d.features(0, static_cast<Eigen::Index>(i)) = (y == 0 ? -2.0 : 2.0) + n01(rng);
    d.features(1, static_cast<Eigen::Index>(i)) = n01(rng);
  }
  return d;
}

// Draws a bounds/workload/channel tuple from the default device ranges.
struct RandomWorker {
  Workload w;
  DeviceBounds b;
  double beta = 0.0;
  double bandwidth = 0.0;
  double deadline = 0.0;
};

RandomWorker random_worker(RngStream& rng, double model_bits, double beta_lo, double beta_hi) {
  RandomWorker r;
  double f1 = uniform(rng, 1e9, 9e9);
  double f2 = uniform(rng, 1e9, 9e9);
  double p1 = log_uniform(rng, 1e-4, 0.1);
  double p2 = log_uniform(rng, 1e-4, 0.1);
  r.b.f_min = std::min(f1, f2);
  r.b.f_max = std::max(f1, f2);
  r.b.p_min = std::min(p1, p2);
  r.b.p_max = std::max(p1, p2);
  r.b.capacitance_alpha = 2e-28;
  r.b.energy_budget = std::numeric_limits<double>::max();
  r.w.dataset_size = uniform_int(rng, 200, 2000);
  r.w.excluded = uniform_int(rng, 0, r.w.dataset_size);
  r.w.epochs = 5;
  r.w.cycles_per_sample = 20.0;
  r.w.model_bits = model_bits;
  r.beta = log_uniform(rng, beta_lo, beta_hi);
  r.bandwidth = 10e6 / static_cast<double>(uniform_int(rng, 1, 10));
  // Pick a compute speed and a transmit power inside the bounds and build
  // the deadline from them, so the slot range always contains a feasible point.
  const double rho = resource::effective_cycles(r.w);
  const double f = uniform(rng, r.b.f_min, r.b.f_max);
  const double p = log_uniform(rng, r.b.p_min, r.b.p_max);
  r.deadline = rho / f + model_bits / channel::uplink_rate(r.bandwidth, r.beta, p);
  return r;
}

}  // namespace

// 1 ------------------------------------------------------------------------
CheckResult check_gradient_fd() {
  return timed("gradient-vs-finite-differences", 10.0, [] {
    auto rng = check_rng(1);
    std::normal_distribution<double> n01(0.0, 1.0);
    double worst = 0.0;
    for (int pair = 0; pair < 20; ++pair) {
      const bool wide = pair % 2 == 1;
      const std::vector<std::size_t> arch = wide ? std::vector<std::size_t>{784, 32, 10}
                                                 : std::vector<std::size_t>{8, 16, 4};
      ModelParameters model = ModelParameters::random(arch, rng);
      for (auto& layer : model.layers()) {
        for (Eigen::Index i = 0; i < layer.biases.size(); ++i) layer.biases[i] = 0.1 * n01(rng);
      }
      Eigen::VectorXd x(static_cast<Eigen::Index>(arch.front()));
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = wide ? uniform(rng, 0.0, 1.0) : n01(rng);
      const int label = static_cast<int>(uniform_int(rng, 0, arch.back() - 1));

      const auto analytic = learning::sample_gradient(model, x, label).flatten();
      const auto fd = oracle::finite_difference_gradient(arch, model.flatten(), x, label, 1e-6);
      std::size_t off = 0;
      for (std::size_t l = 0; l + 1 < arch.size(); ++l) {
        for (const std::size_t len : {arch[l + 1] * arch[l], arch[l + 1]}) {
          double diff = 0.0;
          double ref = 0.0;
          for (std::size_t i = off; i < off + len; ++i) {
            diff += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
            ref += fd[i] * fd[i];
          }
          worst = std::max(worst, std::sqrt(diff) / std::max(std::sqrt(ref), 1e-8));
          off += len;
        }
      }
    }
    return Outcome{worst <= 1e-5, fmt("max per-block relative error %.3g over 20 pairs (limit 1e-5)", worst)};
  });
}

// 2 ------------------------------------------------------------------------
CheckResult check_optimizer_grid() {
  return timed("optimizer-vs-grid-oracle", 60.0, [] {
    auto rng = check_rng(2);
    const double bits = ModelParameters({784, 32, 10}).model_bits();
    double worst_t = 0.0;
    double worst_e = 0.0;
    std::size_t interior = 0;
    for (int i = 0; i < 100; ++i) {
      const RandomWorker r = random_worker(rng, bits, 1e4, 1e12);
      const ResourcePlan plan = resource::minimize_round_energy(r.w, r.deadline, r.bandwidth, r.beta, r.b);
      const Interval iv = oracle::upload_interval(r.w, r.deadline, r.b);
      const auto grid = oracle::grid_argmin(
          [&](double t) { return oracle::round_energy(r.w, r.deadline, r.bandwidth, r.beta, r.b, t); }, iv.lo,
          iv.hi, 1'000'000);
      worst_t = std::max(worst_t, rel(plan.t_up, grid.argmin));
      worst_e = std::max(worst_e, rel(plan.total_energy(), grid.min_value));
      if (grid.argmin > iv.lo && grid.argmin < iv.hi) ++interior;
    }
    return Outcome{worst_t <= 1e-4 && worst_e <= 1e-6,
                   fmt("100 configs (%zu interior optima): max t_up rel err %.3g (limit 1e-4), max energy rel err "
                       "%.3g (limit 1e-6)",
                       interior, worst_t, worst_e)};
  });
}

// 3 ------------------------------------------------------------------------
CheckResult check_lambert_residual() {
  return timed("lambert-w-residual", 1.0, [] {
    constexpr std::size_t kHalf = 5000;
    const double branch = -1.0 / std::numbers::e;
    double worst = 0.0;
    double worst_x = 0.0;
    const auto probe = [&](double x) {
      const double w = numerics::lambert_w0(x);
      const double r = std::abs(w * std::exp(w) - x) / std::max(1.0, std::abs(x));
      if (r > worst) {
        worst = r;
        worst_x = x;
      }
    };
    // Negative half: offsets from the branch point, geometric from 1e-9 to 1/e.
    for (std::size_t i = 0; i < kHalf; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(kHalf - 1);
      probe(branch + 1e-9 * std::pow(-branch / 1e-9, t));
    }
    // Positive half: log-spaced up to 1e6.
    for (std::size_t i = 0; i < kHalf; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(kHalf - 1);
      probe(1e-12 * std::pow(1e18, t));
    }
    return Outcome{worst <= 1e-10,
                   fmt("10000 points on [-1/e+1e-9, 1e6]: max scaled residual %.3g at x=%.6g (limit 1e-10)", worst,
                       worst_x)};
  });
}

// 4 ------------------------------------------------------------------------
CheckResult check_beam_optimality() {
  return timed("beamforming-optimality", 30.0, [] {
    auto rng = check_rng(4);
    ChannelModel model;
    model.antennas = 4;
    const double noise = 1e-8;
    std::size_t failures = 0;
    double min_margin_random = std::numeric_limits<double>::infinity();
    double min_margin_mrc = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 200; ++i) {
      const auto draw = [&] {
        return channel::sample_channel(rng, uniform(rng, 25.0, 100.0), model,
                                       uniform(rng, -std::numbers::pi / 2, std::numbers::pi / 2));
      };
      const ComplexVector h = draw();
      std::vector<ComplexVector> others;
      for (int j = 0; j < i % 4; ++j) others.push_back(draw());
      const BeamState beam = channel::beam_and_gain(h, others, noise);
      const ComplexMatrix r = covariance(others, noise, model.antennas);
      const double q = oracle::quotient(h, r, beam.w);
      const double best = oracle::best_random_beam(h, r, 10'000, rng);
      const double mrc = oracle::quotient(h, r, h / h.norm());
      // Rounding slack only: with no interferers the MRC beam is the optimum.
      const double slack = 1.0 - 1e-12;
      if (!(q >= best * slack) || !(q >= mrc * slack)) ++failures;
      min_margin_random = std::min(min_margin_random, q / best - 1.0);
      min_margin_mrc = std::min(min_margin_mrc, q / mrc - 1.0);
    }
    return Outcome{failures == 0, fmt("200 instances, %zu failures; min q/best_random-1 = %.3g, min q/mrc-1 = %.3g",
                                      failures, min_margin_random, min_margin_mrc)};
  });
}

// 5 ------------------------------------------------------------------------
CheckResult check_closed_forms() {
  return timed("closed-form-consistency", 0.0, [] {
    auto rng = check_rng(5);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double bw = log_uniform(rng, 1e3, 1e8);
      const double beta = log_uniform(rng, 1e-2, 1e12);
      const double t = log_uniform(rng, 1e-4, 1e2);
      const double bits = log_uniform(rng, 1e-6, 40.0) * t * bw;
      const double p = resource::required_power(t, bw, beta, bits);
      worst = std::max(worst, rel(channel::uplink_rate(bw, beta, p), bits / t));
    }
    std::size_t mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
      Workload w;
      w.dataset_size = uniform_int(rng, 1, 100'000);
      w.excluded = 0;
      w.epochs = static_cast<std::uint32_t>(uniform_int(rng, 1, 20));
      w.cycles_per_sample = log_uniform(rng, 1.0, 1e6);
      const double f = uniform(rng, 1e8, 1e10);
      const double alpha = log_uniform(rng, 1e-29, 1e-27);
      const double eps = static_cast<double>(w.epochs);
      const double d = static_cast<double>(w.dataset_size);
      const double all_epochs = alpha / 2.0 * f * f * w.cycles_per_sample * (eps * d);
      if (resource::computation_energy(w, f, alpha) != all_epochs) ++mismatches;
    }
    return Outcome{worst <= 1e-9 && mismatches == 0,
                   fmt("rate/power round trip max rel err %.3g on 1000 tuples (limit 1e-9); "
                       "%zu of 1000 kappa=0 energies differ from the all-epochs formula",
                       worst, mismatches)};
  });
}

// 6 ------------------------------------------------------------------------
CheckResult check_protocol_invariants() {
  return timed("protocol-invariants", 120.0, [] {
    struct Variant {
      const char* name;
      BandwidthMode mode;
      double budget;
    };
    const Variant variants[] = {{"equal-split", BandwidthMode::kEqualSplit, 1e3},
                                {"min-bandwidth-split", BandwidthMode::kMinBandwidthSplit, 1e3},
                                {"tight-budget", BandwidthMode::kEqualSplit, 0.05}};
    std::string failure;
    std::size_t plans = 0;
    std::size_t drops = 0;
    double max_gap = 0.0;
    double max_lambda = 0.0;
    for (const auto& v : variants) {
      ExperimentConfig cfg = config::synthetic_preset(0.8);
      cfg.rounds = 50;
      cfg.population.partition = PartitionScheme::kNonIid;
      cfg.population.classes_per_worker = 2;
      cfg.population.bounds.energy_budget = v.budget;
      cfg.round.bandwidth_mode = v.mode;
      const auto data = experiment::load_data(cfg);
      FederationState state = federation::initialize(data, cfg.population, cfg.round, cfg.seed);
      for (const auto& w : state.workers) {
        std::set<int> support(w.dataset.labels.begin(), w.dataset.labels.end());
        if (support.size() > 2 && failure.empty()) failure = fmt("worker %u holds %zu classes", w.id, support.size());
      }
      for (std::uint32_t round = 1; round <= cfg.rounds; ++round) {
        std::vector<double> before;
        for (const auto& w : state.workers) before.push_back(w.remaining_energy);
        const RoundRecord rec = federation::run_round(state, cfg.round, round);
        double lambda_sum = 0.0;
        for (const auto& wr : rec.per_worker) {
          lambda_sum += wr.lambda;
          if (!wr.feasible()) {
            ++drops;
            continue;
          }
          ++plans;
          const auto& b = state.workers[wr.id].bounds;
          const double gap = std::abs(wr.t_cmp + wr.t_up - rec.deadline);
          max_gap = std::max(max_gap, gap);
          if (failure.empty() && gap > 1e-9) failure = fmt("%s round %u: deadline gap %.3g s", v.name, round, gap);
          if (failure.empty() && (wr.f_cmp < b.f_min || wr.f_cmp > b.f_max)) {
            failure = fmt("%s round %u: f_cmp %.6g outside bounds", v.name, round, wr.f_cmp);
          }
          if (failure.empty() && (wr.p_up < b.p_min || wr.p_up > b.p_max)) {
            failure = fmt("%s round %u: p_up %.6g outside bounds", v.name, round, wr.p_up);
          }
        }
        max_lambda = std::max(max_lambda, lambda_sum);
        if (failure.empty() && lambda_sum > 1.0 + 1e-12) {
          failure = fmt("%s round %u: bandwidth shares sum to %.15g", v.name, round, lambda_sum);
        }
        for (std::size_t k = 0; k < state.workers.size(); ++k) {
          const double now = state.workers[k].remaining_energy;
          if (failure.empty() && (now < 0.0 || now > before[k])) {
            failure = fmt("%s round %u: worker %zu budget %.6g -> %.6g", v.name, round, k, before[k], now);
          }
        }
      }
    }
    const std::string summary = fmt("%zu plans, %zu drops over 3x50 rounds; max |t_cmp+t_up-T| %.3g s, max sum "
                                    "lambda %.15g",
                                    plans, drops, max_gap, max_lambda);
    return Outcome{failure.empty(), failure.empty() ? summary : failure + "; " + summary};
  });
}

// 7 ------------------------------------------------------------------------
CheckResult check_fedavg_reduction() {
  return timed("baseline-reduction-identity", 0.0, [] {
    ExperimentConfig cfg = config::synthetic_preset(1.0);
    cfg.round.deadline_slack = 10.0;
    cfg.population.bounds.energy_budget = 1e12;
    const auto data = experiment::load_data(cfg);
    FederationState state = federation::initialize(data, cfg.population, cfg.round, cfg.seed);
    const auto reference = oracle::fedavg_reference(state, cfg.round, cfg.rounds);
    double worst = 0.0;
    std::size_t drops = 0;
    for (std::uint32_t round = 1; round <= cfg.rounds; ++round) {
      const RoundRecord rec = federation::run_round(state, cfg.round, round);
      for (const auto& wr : rec.per_worker) drops += wr.feasible() ? 0 : 1;
      const auto theta = state.global.flatten();
      const auto& ref = reference[round - 1];
      for (std::size_t i = 0; i < theta.size(); ++i) {
        worst = std::max(worst, std::abs(theta[i] - ref[i]) / std::max(1.0, std::abs(ref[i])));
      }
    }
    return Outcome{worst <= 1e-12 && drops == 0,
                   fmt("%u rounds, %zu dropped updates; max parameter deviation from plain FedAvg %.3g (limit 1e-12)",
                       cfg.rounds, drops, worst)};
  });
}

// 8 ------------------------------------------------------------------------
CheckResult check_energy_trend() {
  return timed("energy-trend", 300.0, [] {
    const ExperimentConfig filtered = config::synthetic_preset(0.8);
    const ExperimentConfig baseline = config::synthetic_preset(1.0);
    const auto data = experiment::load_data(filtered);
    const auto a = federation::run_experiment(data, filtered.population, filtered.round, filtered.rounds,
                                              filtered.seed);
    const auto b = federation::run_experiment(data, baseline.population, baseline.round, baseline.rounds,
                                              baseline.seed);
    const double reduction = 1.0 - a.back().cumulative_energy / b.back().cumulative_energy;
    const double acc_gap = std::abs(a.back().test_accuracy - b.back().test_accuracy);
    const double early = a.at(4).excluded_fraction;
    const double late = a.back().excluded_fraction;
    const bool ok = reduction >= 0.30 && acc_gap <= 0.02 && late > early;
    return Outcome{ok, fmt("energy %.4g J vs %.4g J (%.1f%% lower, need >= 30%%); accuracy %.4f vs %.4f (gap %.2f pp, "
                           "limit 2); excluded fraction round 5 %.3f -> round %u %.3f",
                           a.back().cumulative_energy, b.back().cumulative_energy, 100.0 * reduction,
                           a.back().test_accuracy, b.back().test_accuracy, 100.0 * acc_gap, early, filtered.rounds,
                           late)};
  });
}

// 9 ------------------------------------------------------------------------
CheckResult check_threshold_nesting() {
  return timed("threshold-nesting", 0.0, [] {
    auto rng = check_rng(9);
    const LabeledDataset data = datasets::generate_synthetic(8, 4, 2000, 0.3, rng);
    ModelParameters model = ModelParameters::random({8, 16, 4}, rng);
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const double grid[] = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::string sizes;
    bool nested = true;
    // An untrained, a partly trained and a well trained model.
    for (const int epochs : {0, 1, 5}) {
      for (int e = 0; e < epochs; ++e) model = learning::sgd_epoch(model, data, all, 20, 0.05, rng);
      std::vector<std::vector<std::size_t>> excluded;
      for (const double t : grid) excluded.push_back(excluded_set(learning::filter_samples(model, data, t), data.size()));
      for (std::size_t i = 1; i < excluded.size(); ++i) {
        nested = nested && std::includes(excluded[i - 1].begin(), excluded[i - 1].end(), excluded[i].begin(),
                                         excluded[i].end());
      }
      if (epochs == 5) {
        for (const auto& s : excluded) sizes += (sizes.empty() ? "" : ",") + std::to_string(s.size());
      }
    }
    return Outcome{nested, fmt("excluded counts for theta 0.5..1.0 on the trained model: %s; nested: %s", sizes.c_str(),
                               nested ? "yes" : "no")};
  });
}

// 10 -----------------------------------------------------------------------
CheckResult check_determinism() {
  return timed("determinism", 0.0, [] {
    const auto dir = scratch_dir("det");
    ExperimentConfig cfg = config::synthetic_preset(0.8);
    const auto data = experiment::load_data(cfg);
    std::vector<std::string> outputs;
    const unsigned threads[] = {1, 1, 2, 3, 4, 8};
    for (std::size_t i = 0; i < std::size(threads); ++i) {
      cfg.round.threads = threads[i];
      const auto out = dir / ("run" + std::to_string(i));
      metrics::write_metrics(experiment::run_trials(cfg, data), config::to_json(cfg), cfg.seed, out);
      outputs.push_back(read_file(out / "global.csv"));
    }
    std::filesystem::remove_all(dir);
    const bool same = !outputs.front().empty() &&
                      std::all_of(outputs.begin(), outputs.end(), [&](const auto& s) { return s == outputs.front(); });
    return Outcome{same, fmt("global.csv (%zu bytes) %s across thread counts 1,1,2,3,4,8", outputs.front().size(),
                             same ? "byte-identical" : "DIFFERS")};
  });
}

std::vector<NamedCheck> acceptance_checks() {
  return {{"gradient-vs-finite-differences", check_gradient_fd},
          {"optimizer-vs-grid-oracle", check_optimizer_grid},
          {"lambert-w-residual", check_lambert_residual},
          {"beamforming-optimality", check_beam_optimality},
          {"closed-form-consistency", check_closed_forms},
          {"protocol-invariants", check_protocol_invariants},
          {"baseline-reduction-identity", check_fedavg_reduction},
          {"energy-trend", check_energy_trend},
          {"threshold-nesting", check_threshold_nesting},
          {"determinism", check_determinism}};
}

// Oracle suite -------------------------------------------------------------

namespace {

CheckResult lambert_examples() {
  return timed("lambert-w-examples", 0.0, [] {
    const double w1 = numerics::lambert_w0(1.0);
    const double n1 = oracle::lambert_w0_newton(1.0);
    const double x2 = -2.0 * std::exp(-2.0);
    const double w2 = numerics::lambert_w0(x2);
    const double n2 = oracle::lambert_w0_newton(x2);
    const bool ok = std::abs(w1 - n1) <= 1e-12 && std::abs(n1 - 0.5671432904) <= 1e-10 &&
                    std::abs(w2 - n2) <= 1e-12 && std::abs(w2 + 0.40637) <= 1e-5 && numerics::lambert_w0(0.0) == 0.0 &&
                    std::abs(numerics::lambert_w0(std::numbers::e) - 1.0) <= 1e-12;
    // Lower branch: residual on a sweep.
    double worst = 0.0;
    for (int i = 1; i < 1000; ++i) {
      const double x = -std::exp(-1.0) * static_cast<double>(i) / 1000.0;
      const double w = numerics::lambert_wm1(x);
      worst = std::max(worst, std::abs(w * std::exp(w) - x));
    }
    return Outcome{ok && worst <= 1e-12,
                   fmt("W0(1)=%.12f (Newton %.12f), W0(-2e^-2)=%.8f (Newton %.8f), W-1 max residual %.3g", w1, n1, w2,
                       n2, worst)};
  });
}

CheckResult golden_upload_curve() {
  return timed("golden-section-upload-curve", 0.0, [] {
    const auto f = [](double t) { return resource::upload_energy(t, 1e6, 1e6, 1e6); };
    const auto gs = numerics::golden_section_min(f, {0.1, 2.0});
    const auto grid = oracle::grid_argmin(f, 0.1, 2.0, 1'000'000);
    const double err = rel(gs.argmin, grid.argmin);
    return Outcome{err <= 1e-4, fmt("argmin %.9g vs grid %.9g (rel %.3g)", gs.argmin, grid.argmin, err)};
  });
}

CheckResult golden_quartics() {
  return timed("golden-section-quartics", 0.0, [] {
    auto rng = check_rng(101);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double lo = uniform(rng, -10.0, 0.0);
      const double hi = lo + uniform(rng, 1.0, 20.0);
      const double c = uniform(rng, lo, hi);
      const double s = uniform(rng, 0.1, 10.0);
      const double k = uniform(rng, 0.0, 5.0);
      const auto f = [&](double x) {
        const double q = (x - c) * (x - c);
        return k * q * q + s * q + 1.0;
      };
      const auto gs = numerics::golden_section_min(f, {lo, hi}, 1e-9);
      const auto grid = oracle::grid_argmin(f, lo, hi, 1'000'000);
      worst = std::max(worst, std::abs(gs.argmin - grid.argmin) / std::max(std::abs(grid.argmin), hi - lo));
    }
    return Outcome{worst <= 1e-4, fmt("1000 quartics: max argmin error %.3g relative to max(|x*|, width)", worst)};
  });
}

// Same comparison with a per-sample cost large enough that computation and
// upload energy trade off inside the slot. Many optima sit on the p_max
// boundary, which the grid can only approach from one side, so only a search
// result worse than the grid counts as an error here. Both methods resolve
// t_up to about 1e-6 of the slot width, which is the scale used for t_up.
CheckResult optimizer_interior() {
  return timed("optimizer-vs-grid-interior", 0.0, [] {
    auto rng = check_rng(115);
    const double bits = ModelParameters({8, 16, 4}).model_bits();
    double worst_t = 0.0;
    double worst_e = 0.0;
    std::size_t interior = 0;
    for (int i = 0; i < 200; ++i) {
      RandomWorker r = random_worker(rng, bits, 1e6, 1e12);
      r.w.cycles_per_sample = log_uniform(rng, 1e2, 1e5);
      r.b.f_min = log_uniform(rng, 1e7, 1e9);
      r.w.dataset_size = uniform_int(rng, 20, 400);
      r.w.excluded = uniform_int(rng, 0, r.w.dataset_size);
      const double rho = resource::effective_cycles(r.w);
      const double f = uniform(rng, r.b.f_min, r.b.f_max);
      const double p = log_uniform(rng, r.b.p_min, r.b.p_max);
      r.deadline = rho / f + bits / channel::uplink_rate(r.bandwidth, r.beta, p);
      const ResourcePlan plan = resource::minimize_round_energy(r.w, r.deadline, r.bandwidth, r.beta, r.b);
      const Interval iv = oracle::upload_interval(r.w, r.deadline, r.b);
      const auto grid = oracle::grid_argmin(
          [&](double t) { return oracle::round_energy(r.w, r.deadline, r.bandwidth, r.beta, r.b, t); }, iv.lo,
          iv.hi, 1'000'000);
      const double reach = bits / channel::uplink_rate(r.bandwidth, r.beta, r.b.p_max);
      const double step = iv.width() / 1e6;
      const bool inside = plan.t_up > std::max(iv.lo, reach) + 2 * step && plan.t_up < iv.hi - 2 * step;
      if (inside) {
        ++interior;
        worst_t = std::max(worst_t, std::abs(plan.t_up - grid.argmin) / iv.width());
      }
      worst_e = std::max(worst_e, (plan.total_energy() - grid.min_value) / grid.min_value);
    }
    return Outcome{worst_t <= 1e-5 && worst_e <= 1e-6 && interior > 0,
                   fmt("200 configs, %zu interior optima with max |t_up error| / slot width %.3g; search exceeds grid energy by at "
                       "most %.3g relative",
                       interior, worst_t, worst_e)};
  });
}

CheckResult beam_scale_and_phase() {
  return timed("beam-invariances", 0.0, [] {
    auto rng = check_rng(102);
    ChannelModel model;
    double worst = 0.0;
    double worst_norm = 0.0;
    for (int i = 0; i < 200; ++i) {
      const ComplexVector h = channel::sample_channel(rng, uniform(rng, 25, 100), model);
      std::vector<ComplexVector> others;
      for (int j = 0; j < 2; ++j) others.push_back(channel::sample_channel(rng, uniform(rng, 25, 100), model));
      const ComplexMatrix r = covariance(others, 1e-8, model.antennas);
      const ComplexVector w = numerics::max_generalized_eigvec(h, r);
      const ComplexVector w_scaled = numerics::max_generalized_eigvec(std::complex<double>(3.0, -2.0) * h, r);
      const std::complex<double> phase = std::polar(1.0, uniform(rng, 0.0, 6.28));
      const double q = oracle::quotient(h, r, w);
      worst = std::max({worst, rel(oracle::quotient(h, r, w_scaled), q), rel(oracle::quotient(h, r, phase * w), q)});
      worst_norm = std::max(worst_norm, std::abs(w.norm() - 1.0));
    }
    return Outcome{worst <= 1e-10 && worst_norm <= 1e-12,
                   fmt("quotient change under scaling/phase %.3g, max | ||w|| - 1 | %.3g", worst, worst_norm)};
  });
}

CheckResult beta_vs_pencil() {
  return timed("beta-vs-generalized-eigenvalue", 0.0, [] {
    auto rng = check_rng(103);
    ChannelModel model;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const ComplexVector h = channel::sample_channel(rng, uniform(rng, 25, 100), model);
      std::vector<ComplexVector> others;
      for (int j = 0; j < 3; ++j) others.push_back(channel::sample_channel(rng, uniform(rng, 25, 100), model));
      const BeamState beam = channel::beam_and_gain(h, others, 1e-8);
      worst = std::max(worst, rel(beam.beta, oracle::max_quotient(h, covariance(others, 1e-8, model.antennas))));
    }
    return Outcome{worst <= 1e-9, fmt("200 instances with 3 interferers: max beta rel err %.3g (limit 1e-9)", worst)};
  });
}

CheckResult beam_examples() {
  return timed("beam-examples", 0.0, [] {
    ComplexVector one(1);
    one << std::complex<double>(2e-3, 0.0);
    const BeamState scalar = channel::beam_and_gain(one, {}, 1e-8);
    ComplexVector a(2);
    a << 1.0, std::complex<double>(0.0, 1.0);
    const ComplexVector w = numerics::max_generalized_eigvec(a, 1e-8 * ComplexMatrix::Identity(2, 2));
    const double mrc_align = std::abs(a.dot(w)) / a.norm();
    const std::vector<ComplexVector> self = {one};
    const BeamState jammed = channel::beam_and_gain(one, self, 1e-8);
    const bool ok = rel(scalar.beta, 400.0) <= 1e-12 && std::abs(mrc_align - 1.0) <= 1e-12 && jammed.beta < scalar.beta;
    return Outcome{ok, fmt("scalar beta %.12g (want 400), MRC alignment %.15f, self-interfered beta %.6g", scalar.beta,
                           mrc_align, jammed.beta)};
  });
}

CheckResult channel_power() {
  return timed("channel-mean-power", 0.0, [] {
    auto rng = check_rng(104);
    ChannelModel model;
    const double d = 50.0;
    double sum = 0.0;
    const int draws = 100'000;
    for (int i = 0; i < draws; ++i) sum += channel::sample_channel(rng, d, model, 0.3).squaredNorm();
    const double mean = sum / draws / model.antennas;
    const double want = std::pow(d, -model.pathloss_exponent);
    ChannelModel los = model;
    los.rician_k_db = std::numeric_limits<double>::infinity();
    const ComplexVector h = channel::sample_channel(rng, d, los, 0.3);
    double los_err = 0.0;
    for (Eigen::Index m = 0; m < h.size(); ++m) los_err = std::max(los_err, rel(std::abs(h[m]), std::sqrt(want)));
    return Outcome{rel(mean, want) <= 0.02 && los_err <= 1e-4,
                   fmt("E||h||^2/M = %.6g vs d^-n = %.6g (rel %.3g, limit 0.02); pure LOS amplitude err %.3g", mean,
                       want, rel(mean, want), los_err)};
  });
}

CheckResult rate_examples() {
  return timed("rate-examples", 0.0, [] {
    const double r = channel::uplink_rate(1e6, 1e8, 0.02);
    // β·P/W = 1e8 · 0.02 / 1e6 = 2.
    const double want = 1e6 * std::log2(3.0);
    const double back = resource::required_power(1.0, 1e6, 1e8, r);
    const bool ok = rel(r, want) <= 1e-12 && rel(back, 0.02) <= 1e-12 && channel::uplink_rate(1e6, 1e6, 1.0) == 1e6 &&
                    channel::uplink_rate(1e6, 1e8, 0.0) == 0.0;
    return Outcome{ok, fmt("rate %.12g vs %.12g; power round trip %.12g W", r, want, back)};
  });
}

CheckResult bandwidth_examples() {
  return timed("bandwidth-closed-forms", 0.0, [] {
    // Printed expression at Π = 2 against the Newton oracle.
    const double bits = 1e6;
    const double beta = bits * std::numbers::ln2 / 2.0;
    const double printed = resource::optimal_bandwidth(1.0, 1.0, beta, bits);
    const double oracle_value = bits * std::numbers::ln2 / (oracle::lambert_w0_newton(-2.0 * std::exp(-2.0)) + 2.0);
    // Minimum rate-feasible bandwidth against a constrained grid search,
    // scaling the model size.
    double worst = 0.0;
    std::string ratios;
    double previous = 0.0;
    for (const double scale : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
      const double xi = 1e6 * scale;
      const double closed = resource::min_bandwidth_for_rate(1.0, 0.1, 1e8, xi);
      const double grid = oracle::min_bandwidth_grid(1.0, 0.1, 1e8, xi, 1.0, 1e12, 1'000'000);
      worst = std::max(worst, rel(closed, grid));
      if (previous > 0.0) ratios += fmt("%s%.3f", ratios.empty() ? "" : ",", closed / previous);
      previous = closed;
    }
    const bool ok = rel(printed, oracle_value) <= 1e-10 && rel(printed, 4.3495e5) <= 1e-4 && worst <= 1e-6;
    return Outcome{ok, fmt("printed form %.6g Hz (oracle %.6g); min-bandwidth vs grid max rel err %.3g; growth ratios %s",
                           printed, oracle_value, worst, ratios.c_str())};
  });
}

CheckResult upload_energy_decreasing() {
  return timed("upload-energy-decreasing", 0.0, [] {
    auto rng = check_rng(105);
    std::size_t violations = 0;
    for (int i = 0; i < 100; ++i) {
      const double bw = log_uniform(rng, 1e4, 1e7);
      const double beta = log_uniform(rng, 1e2, 1e12);
      const double bits = log_uniform(rng, 1e4, 1e7);
      const double t_lo = bits / (20.0 * bw);
      const double t_hi = bits / (1e-2 * bw);
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 10'000; ++k) {
        const double t = t_lo + (t_hi - t_lo) * k / 9999.0;
        const double e = resource::upload_energy(t, bw, beta, bits);
        if (!(e < prev)) ++violations;
        prev = e;
      }
    }
    return Outcome{violations == 0, fmt("100 grids of 10^4 points, %zu non-decreasing steps", violations)};
  });
}

CheckResult plan_properties() {
  return timed("plan-properties", 0.0, [] {
    auto rng = check_rng(106);
    const double bits = ModelParameters({784, 32, 10}).model_bits();
    std::size_t bad_kappa = 0;
    std::size_t bad_plan = 0;
    for (int i = 0; i < 1000; ++i) {
      RandomWorker r = random_worker(rng, bits, 1e6, 1e12);
      Workload full = r.w;
      full.excluded = 0;
      // Deadline built around the full workload keeps both problems feasible.
      r.deadline += resource::effective_cycles(full) / r.b.f_min;
      const ResourcePlan a = resource::minimize_round_energy(full, r.deadline, r.bandwidth, r.beta, r.b);
      const ResourcePlan b = resource::minimize_round_energy(r.w, r.deadline, r.bandwidth, r.beta, r.b);
      if (b.total_energy() > a.total_energy() * (1.0 + 1e-9)) ++bad_kappa;
      for (const auto& p : {a, b}) {
        const bool ok = std::abs(p.t_up + p.t_cmp - r.deadline) <= 1e-9 && p.f_cmp >= r.b.f_min &&
                        p.f_cmp <= r.b.f_max && p.p_up >= r.b.p_min && p.p_up <= r.b.p_max && p.e_cmp >= 0 &&
                        p.e_up >= 0;
        if (!ok) ++bad_plan;
      }
      const Interval iv = resource::upload_time_bounds(resource::effective_cycles(r.w), r.deadline, r.b);
      const double at_lo = resource::round_energy_objective(r.w, r.deadline, r.bandwidth, r.beta, r.b, iv.lo);
      const double at_hi = resource::round_energy_objective(r.w, r.deadline, r.bandwidth, r.beta, r.b, iv.hi);
      const double best = resource::round_energy_objective(r.w, r.deadline, r.bandwidth, r.beta, r.b, b.t_up);
      if (!(best <= at_lo) || !(best <= at_hi * (1.0 + 1e-12))) ++bad_plan;
    }
    return Outcome{bad_kappa == 0 && bad_plan == 0,
                   fmt("1000 configs: %zu where excluding samples raised energy, %zu plans violating deadline, bounds "
                       "or endpoint optimality",
                       bad_kappa, bad_plan)};
  });
}

CheckResult learning_properties() {
  return timed("learning-properties", 0.0, [] {
    auto rng = check_rng(107);
    const ModelParameters model = ModelParameters::random({6, 8, 5}, rng);
    Eigen::VectorXd x = Eigen::VectorXd::Random(6);
    const Eigen::VectorXd z = learning::logits(model, x);
    const Eigen::VectorXd shifted = (z.array() + 123.0).matrix();
    const double shift = (learning::softmax(z) - learning::softmax(shifted)).cwiseAbs().maxCoeff();
    const double norm = std::abs(learning::forward(model, x).sum() - 1.0);
    std::vector<WeightedUpdate> same = {{&model, 3}, {&model, 5}, {&model, 11}};
    const auto agg = learning::aggregate(same).flatten();
    const auto ref = model.flatten();
    double affine = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) affine = std::max(affine, std::abs(agg[i] - ref[i]));
    const bool ok = shift <= 1e-14 && norm <= 1e-12 && affine <= 1e-12;
    return Outcome{ok, fmt("softmax shift change %.3g, |sum p - 1| %.3g, identical-model aggregate deviation %.3g",
                           shift, norm, affine)};
  });
}

CheckResult toy_filter() {
  return timed("toy-filter-excludes", 0.0, [] {
    auto rng = check_rng(108);
    const LabeledDataset data = gaussian_blobs(400, rng);
    ModelParameters model = ModelParameters::random({2, 8, 2}, rng);
    std::size_t kappa = 0;
    double acc = 0.0;
    for (int round = 0; round < 50 && acc < 0.9; ++round) {
      model = learning::local_round(model, data, 5, 20, 0.05, 0.8, rng).model;
      acc = learning::evaluate(model, data).accuracy;
    }
    if (acc >= 0.9) kappa = learning::local_round(model, data, 5, 20, 0.05, 0.8, rng).filter.excluded_count;
    return Outcome{acc >= 0.9 && kappa > 0, fmt("train accuracy %.3f, kappa %zu of %zu", acc, kappa, data.size())};
  });
}

CheckResult random_model_accuracy() {
  return timed("random-model-accuracy", 0.0, [] {
    auto rng = check_rng(109);
    LabeledDataset data;
    data.num_classes = 10;
    data.features.resize(20, 10'000);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (Eigen::Index i = 0; i < data.features.size(); ++i) data.features.data()[i] = n01(rng);
    for (int i = 0; i < 10'000; ++i) data.labels.push_back(static_cast<int>(uniform_int(rng, 0, 9)));
    const double acc = learning::evaluate(ModelParameters::random({20, 32, 10}, rng), data).accuracy;
    return Outcome{std::abs(acc - 0.1) <= 0.01, fmt("accuracy %.4f (want 0.1 +- 0.01)", acc)};
  });
}

double chi_square_bound(double df) { return df + 3.0 * std::sqrt(2.0 * df); }

CheckResult partition_histograms() {
  return timed("partition-histograms", 0.0, [] {
    auto rng = check_rng(110);
    LabeledDataset data;
    data.num_classes = 10;
    data.features = Eigen::MatrixXd::Zero(1, 5000);
    for (int i = 0; i < 5000; ++i) data.labels.push_back(static_cast<int>(uniform_int(rng, 0, 9)));
    std::vector<double> global(10, 0.0);
    for (const int y : data.labels) global[static_cast<std::size_t>(y)] += 1.0 / 5000.0;
    const auto parts = federation::partition_iid(data, 10, rng);
    double chi = 0.0;
    std::size_t total = 0;
    for (const auto& p : parts) {
      std::vector<double> counts(10, 0.0);
      for (const int y : p.labels) counts[static_cast<std::size_t>(y)] += 1.0;
      for (std::size_t c = 0; c < 10; ++c) {
        const double e = global[c] * static_cast<double>(p.size());
        chi += (counts[c] - e) * (counts[c] - e) / e;
      }
      total += p.size();
    }
    const double bound = chi_square_bound(9.0 * 9.0);

    const auto pairs = federation::partition_noniid(data, 5, 2, rng);
    std::set<int> covered;
    bool disjoint = true;
    for (const auto& p : pairs) {
      std::set<int> s(p.labels.begin(), p.labels.end());
      for (const int c : s) disjoint = disjoint && covered.insert(c).second;
      disjoint = disjoint && s.size() == 2;
    }
    const bool ok = chi <= bound && total == 5000 && disjoint && covered.size() == 10;
    return Outcome{ok, fmt("iid chi-square %.1f (bound %.1f); 2-class shards disjoint and covering: %s", chi, bound,
                           disjoint && covered.size() == 10 ? "yes" : "no")};
  });
}

CheckResult selection_uniformity() {
  return timed("selection-uniformity", 0.0, [] {
    auto rng = check_rng(111);
    std::vector<double> counts(100, 0.0);
    for (int r = 0; r < 10'000; ++r) {
      for (const auto id : federation::select_workers(100, 0.1, rng)) counts[id] += 1.0;
    }
    const double e = 10'000 * 0.1;
    double chi = 0.0;
    for (const double c : counts) chi += (c - e) * (c - e) / e;
    return Outcome{chi <= chi_square_bound(99.0), fmt("chi-square %.1f (bound %.1f)", chi, chi_square_bound(99.0))};
  });
}

CheckResult toy_energy() {
  return timed("toy-run-energy", 0.0, [] {
    ExperimentConfig a = config::synthetic_preset(0.8);
    ExperimentConfig b = config::synthetic_preset(1.0);
    a.rounds = b.rounds = 20;
    const auto data = experiment::load_data(a);
    const double ea = federation::run_experiment(data, a.population, a.round, a.rounds, a.seed).back().cumulative_energy;
    const double eb = federation::run_experiment(data, b.population, b.round, b.rounds, b.seed).back().cumulative_energy;
    return Outcome{ea < eb, fmt("20 rounds: %.4g J filtered vs %.4g J baseline", ea, eb)};
  });
}

CheckResult trial_mean_smoothing() {
  return timed("trial-mean-variance", 0.0, [] {
    ExperimentConfig cfg = config::synthetic_preset(0.8);
    cfg.rounds = 30;
    cfg.trials = 5;
    const auto data = experiment::load_data(cfg);
    const auto trials = experiment::run_trials(cfg, data);
    const auto variance = [](const std::vector<RoundRecord>& recs) {
      double mean = 0.0;
      for (const auto& r : recs) mean += r.instantaneous_energy / static_cast<double>(recs.size());
      double v = 0.0;
      for (const auto& r : recs) v += (r.instantaneous_energy - mean) * (r.instantaneous_energy - mean);
      return v / static_cast<double>(recs.size());
    };
    double single = 0.0;
    for (const auto& t : trials) single += variance(t) / static_cast<double>(trials.size());
    const double averaged = variance(federation::mean_curve(trials));
    return Outcome{averaged < single,
                   fmt("round-to-round variance of the mean curve %.4g vs %.4g averaged over single trials", averaged,
                       single)};
  });
}

CheckResult synthetic_learnable() {
  return timed("synthetic-reference-training", 0.0, [] {
    auto rng = check_rng(112);
    const LabeledDataset data = datasets::generate_synthetic(8, 4, 4000, 0.3, rng);
    std::vector<std::size_t> train(3200);
    std::vector<std::size_t> test(800);
    std::iota(train.begin(), train.end(), std::size_t{0});
    std::iota(test.begin(), test.end(), std::size_t{3200});
    const LabeledDataset tr = data.subset(train);
    const LabeledDataset te = data.subset(test);
    std::vector<std::size_t> all(tr.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    ModelParameters model = ModelParameters::random({8, 16, 4}, rng);
    double acc = 0.0;
    int epochs = 0;
    while (epochs < 50 && acc <= 0.95) {
      model = learning::sgd_epoch(model, tr, all, 20, 0.05, rng);
      ++epochs;
      acc = learning::evaluate(model, te).accuracy;
    }
    return Outcome{acc > 0.95, fmt("test accuracy %.4f after %d epochs", acc, epochs)};
  });
}

std::vector<std::uint8_t> idx_header(std::uint32_t magic, std::initializer_list<std::uint32_t> dims) {
  std::vector<std::uint8_t> out;
  for (const std::uint32_t v : std::initializer_list<std::uint32_t>{magic}) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
  }
  for (const std::uint32_t v : dims) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
  }
  return out;
}

CheckResult idx_reader() {
  return timed("idx-reader", 0.0, [] {
    auto rng = check_rng(113);
    const std::uint32_t n = 600;
    auto images = idx_header(datasets::kIdxImagesMagic, {n, 28, 28});
    auto labels = idx_header(datasets::kIdxLabelsMagic, {n});
    for (std::uint32_t i = 0; i < n * 784; ++i) images.push_back(static_cast<std::uint8_t>(uniform_int(rng, 0, 255)));
    for (std::uint32_t i = 0; i < n; ++i) labels.push_back(static_cast<std::uint8_t>(i % 10));
    const auto d = datasets::parse_mnist_idx(images, labels, n, rng);
    bool ok = d.size() == n && d.dim() == 784 && d.features.minCoeff() >= 0.0 && d.features.maxCoeff() <= 1.0 &&
              *std::max_element(d.labels.begin(), d.labels.end()) == 9;
    std::string real = "no MNIST files under data/";
    const std::filesystem::path img = "data/train-images-idx3-ubyte";
    const std::filesystem::path lab = "data/train-labels-idx1-ubyte";
    if (std::filesystem::exists(img) && std::filesystem::exists(lab)) {
      const std::string head = read_file(img).substr(0, 16);
      std::uint32_t count = 0;
      for (int i = 4; i < 8; ++i) count = count << 8 | static_cast<unsigned char>(head[static_cast<std::size_t>(i)]);
      const auto m = datasets::load_mnist_idx(img, lab, 1000, rng);
      const bool real_ok = count == 60'000 && m.dim() == 784 && m.size() == 1000;
      ok = ok && real_ok;
      real = fmt("MNIST header reports %u items, subset dim %zu", count, m.dim());
    }
    return Outcome{ok, fmt("synthetic IDX: %zu items of dim %zu; %s", d.size(), d.dim(), real.c_str())};
  });
}

CheckResult metrics_round_trip() {
  return timed("metrics-round-trip", 0.0, [] {
    auto rng = check_rng(114);
    std::vector<metrics::GlobalRow> g(50);
    std::vector<metrics::WorkerRow> w(200);
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = {static_cast<std::uint32_t>(i + 1), log_uniform(rng, 1e-3, 10), uniform(rng, 0, 1),
              log_uniform(rng, 1e-9, 1e3), log_uniform(rng, 1e-9, 1e6), uniform(rng, 0, 1)};
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = {static_cast<std::uint32_t>(i % 3), static_cast<std::uint32_t>(i / 3), static_cast<std::uint32_t>(i % 17),
              static_cast<std::size_t>(i * 7), log_uniform(rng, 1e-12, 1), log_uniform(rng, 1e-12, 1),
              log_uniform(rng, 1e-9, 1), log_uniform(rng, 1e-9, 1), uniform(rng, 1e9, 9e9),
              log_uniform(rng, 1e-4, 0.1), uniform(rng, 0, 1), i % 5 != 0};
    }
    const auto dir = scratch_dir("csv");
    metrics::write_global_csv(g, dir / "g.csv");
    metrics::write_workers_csv(w, dir / "w.csv");
    const auto g2 = metrics::read_global_csv(dir / "g.csv");
    const auto w2 = metrics::read_workers_csv(dir / "w.csv");
    std::filesystem::remove_all(dir);
    double worst = 0.0;
    bool exact = g2.size() == g.size() && w2.size() == w.size();
    for (std::size_t i = 0; exact && i < g.size(); ++i) {
      exact = g2[i].round == g[i].round;
      for (const auto& [a, b] : {std::pair{g[i].test_loss, g2[i].test_loss}, {g[i].test_accuracy, g2[i].test_accuracy},
                                 {g[i].inst_energy_j, g2[i].inst_energy_j}, {g[i].cum_energy_j, g2[i].cum_energy_j},
                                 {g[i].excluded_fraction, g2[i].excluded_fraction}}) {
        worst = std::max(worst, rel(b, a));
      }
    }
    for (std::size_t i = 0; exact && i < w.size(); ++i) {
      exact = w2[i].trial == w[i].trial && w2[i].round == w[i].round && w2[i].worker_id == w[i].worker_id &&
              w2[i].kappa == w[i].kappa && w2[i].feasible == w[i].feasible;
      for (const auto& [a, b] : {std::pair{w[i].e_cmp_j, w2[i].e_cmp_j}, {w[i].e_up_j, w2[i].e_up_j},
                                 {w[i].t_cmp_s, w2[i].t_cmp_s}, {w[i].t_up_s, w2[i].t_up_s},
                                 {w[i].f_cmp_hz, w2[i].f_cmp_hz}, {w[i].p_up_w, w2[i].p_up_w},
                                 {w[i].lambda, w2[i].lambda}}) {
        worst = std::max(worst, rel(b, a));
      }
    }
    return Outcome{exact && worst <= 1e-12, fmt("integer fields %s; max real rel err %.3g", exact ? "exact" : "DIFFER",
                                                worst)};
  });
}

CheckResult config_round_trip() {
  return timed("config-round-trip", 0.0, [] {
    ExperimentConfig cfg = config::synthetic_preset(0.7);
    cfg.round.bandwidth_mode = BandwidthMode::kMinBandwidthSplit;
    cfg.population.partition = PartitionScheme::kNonIid;
    cfg.population.hidden = {12, 7};
    cfg.seed = 987654321;
    cfg.trials = 3;
    const auto first = config::to_json(cfg);
    const auto again = config::to_json(config::parse_config(first.dump()));
    const ExperimentConfig back = config::parse_config(first.dump());
    const bool ok = first == again && back.population.bounds.p_max == cfg.population.bounds.p_max &&
                    std::abs(config::dbm_to_watts(20.0) - 0.1) <= 1e-15 &&
                    std::abs(config::dbm_to_watts(-10.0) - 1e-4) <= 1e-19;
    return Outcome{ok, ok ? "load(write(config)) reproduces every field" : "config round trip changed a field"};
  });
}

}  // namespace

std::vector<NamedCheck> oracle_checks() {
  return {{"lambert-w-examples", lambert_examples},
          {"golden-section-upload-curve", golden_upload_curve},
          {"golden-section-quartics", golden_quartics},
          {"optimizer-vs-grid-interior", optimizer_interior},
          {"beam-invariances", beam_scale_and_phase},
          {"beta-vs-generalized-eigenvalue", beta_vs_pencil},
          {"beam-examples", beam_examples},
          {"channel-mean-power", channel_power},
          {"rate-examples", rate_examples},
          {"bandwidth-closed-forms", bandwidth_examples},
          {"upload-energy-decreasing", upload_energy_decreasing},
          {"plan-properties", plan_properties},
          {"learning-properties", learning_properties},
          {"toy-filter-excludes", toy_filter},
          {"random-model-accuracy", random_model_accuracy},
          {"partition-histograms", partition_histograms},
          {"selection-uniformity", selection_uniformity},
          {"toy-run-energy", toy_energy},
          {"trial-mean-variance", trial_mean_smoothing},
          {"synthetic-reference-training", synthetic_learnable},
          {"idx-reader", idx_reader},
          {"metrics-round-trip", metrics_round_trip},
          {"config-round-trip", config_round_trip}};
}

bool run_checks(const std::vector<NamedCheck>& checks, std::ostream& out) {
  bool all = true;
  for (const auto& c : checks) {
    const CheckResult r = c.run();
    all = all && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << fmt(" (%.2f s)", r.seconds) << '\n';
    out.flush();
  }
  return all;
}

bool run_selftest(std::ostream& out) {
  out << "== oracle and invariant checks\n";
  const bool oracles = run_checks(oracle_checks(), out);
  out << "== acceptance checks\n";
  const bool acceptance = run_checks(acceptance_checks(), out);
  const bool ok = oracles && acceptance;
  out << (ok ? "selftest passed\n" : "selftest FAILED\n");
  return ok;
}

}  // namespace feel::selftest
