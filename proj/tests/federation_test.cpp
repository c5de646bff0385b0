#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"

#include "feel/config.hpp"
#include "feel/datasets.hpp"
#include "feel/errors.hpp"
#include "feel/experiment.hpp"
#include "feel/federation.hpp"

using namespace feel;
using namespace feel::federation;

namespace {

LabeledDataset blobs(std::size_t n, std::size_t classes) {
  auto rng = derive_stream(21, StreamTag::kData);
  return datasets::generate_synthetic(8, classes, n, 0.3, rng);
}

std::set<int> support(const LabeledDataset& d) { return {d.labels.begin(), d.labels.end()}; }

}  // namespace

TEST_CASE("iid partition") {
  const auto data = blobs(100, 4);
  auto rng = derive_stream(1, StreamTag::kPartition);
  const auto one = partition_iid(data, 1, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 100);
  const auto four = partition_iid(data, 4, rng);
  for (const auto& p : four) CHECK(p.size() == 25);
}

TEST_CASE("non-iid partition") {
  const auto data = blobs(1000, 10);
  auto rng = derive_stream(1, StreamTag::kPartition);
  const auto parts = partition_noniid(data, 5, 2, rng);
  std::set<int> seen;
  for (const auto& p : parts) {
    const auto s = support(p);
    CHECK(s.size() == 2);
    for (int c : s) CHECK(seen.insert(c).second);
  }
  CHECK(seen.size() == 10);
  CHECK(support(partition_noniid(data, 1, 2, rng)[0]).size() == 2);
  CHECK_THROWS_AS(partition_noniid(data, 1, 11, rng), PartitionError);
}

TEST_CASE("worker selection") {
  auto rng = derive_stream(1, StreamTag::kSelection);
  const auto all = select_workers(20, 1.0, rng);
  std::vector<std::uint32_t> ids(20);
  std::iota(ids.begin(), ids.end(), 0u);
  CHECK(all == ids);
  const auto ten = select_workers(100, 0.1, rng);
  CHECK(ten.size() == 10);
  CHECK(std::set<std::uint32_t>(ten.begin(), ten.end()).size() == 10);
  CHECK_THROWS_AS(select_workers(10, 0.0, rng), DomainError);
}

TEST_CASE("rounds keep the deadline and the ledger") {
  auto cfg = config::synthetic_preset(0.8);
  cfg.rounds = 3;
  cfg.data.synthetic_samples = 800;
  const auto data = experiment::load_data(cfg);
  auto state = initialize(data, cfg.population, cfg.round, cfg.seed);
  double last = 0.0;
  for (std::uint32_t r = 1; r <= 3; ++r) {
    const auto before = state.workers;
    const RoundRecord rec = run_round(state, cfg.round, r);
    double lambda = 0.0;
    for (const auto& w : rec.per_worker) {
      lambda += w.lambda;
      if (w.feasible()) CHECK(std::abs(w.t_cmp + w.t_up - rec.deadline) <= 1e-9 * rec.deadline);
    }
    CHECK(lambda <= 1.0 + 1e-12);
    for (std::size_t k = 0; k < before.size(); ++k) {
      CHECK(state.workers[k].remaining_energy <= before[k].remaining_energy);
      CHECK(state.workers[k].remaining_energy >= 0.0);
    }
    CHECK(rec.cumulative_energy >= last);
    last = rec.cumulative_energy;
  }
}

TEST_CASE("experiment length and determinism") {
  auto cfg = config::synthetic_preset(0.8);
  cfg.data.synthetic_samples = 800;
  const auto data = experiment::load_data(cfg);
  const auto one = run_experiment(data, cfg.population, cfg.round, 1, 4);
  CHECK(one.size() == 1);
  const auto a = run_experiment(data, cfg.population, cfg.round, 4, 4);
  const auto b = run_experiment(data, cfg.population, cfg.round, 4, 4);
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].test_loss == b[r].test_loss);
    CHECK(a[r].cumulative_energy == b[r].cumulative_energy);
  }
}
