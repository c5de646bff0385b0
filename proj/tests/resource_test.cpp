#include <cmath>
#include <limits>

#include "doctest.h"

#include "feel/errors.hpp"
#include "feel/resource.hpp"

using namespace feel;
using namespace feel::resource;

namespace {

Workload workload(std::uint32_t epochs, std::uint64_t d, std::uint64_t kappa) {
  Workload w;
  w.epochs = epochs;
  w.dataset_size = d;
  w.excluded = kappa;
  w.cycles_per_sample = 20.0;
  w.model_bits = 1e6;
  return w;
}

}  // namespace

TEST_CASE("effective cycles") {
  CHECK(effective_cycles(workload(5, 600, 0)) == 60000.0);
  CHECK(effective_cycles(workload(5, 600, 600)) == 12000.0);
  CHECK(effective_cycles(workload(3, 1000, 400)) == 44000.0);
}

TEST_CASE("computation time") {
  CHECK(computation_time(60000.0, 1e9) == doctest::Approx(6e-5));
  CHECK(computation_time(0.0, 1e9) == 0.0);
  CHECK(computation_time(44000.0, 2e9) == doctest::Approx(2.2e-5));
}

TEST_CASE("computation energy") {
  CHECK(computation_energy(workload(3, 1000, 400), 2e9, 2e-28) == doctest::Approx(1.76e-5).epsilon(1e-12));
  CHECK(computation_energy(workload(1, 1000, 0), 1e9, 2e-28) == doctest::Approx(2e-6).epsilon(1e-12));
  CHECK(computation_energy(workload(7, 1000, 1000), 1e9, 2e-28) ==
        computation_energy(workload(1, 1000, 0), 1e9, 2e-28));
}

TEST_CASE("required power and upload energy") {
  CHECK(required_power(0.5, 2e6, 1e8, 1e6) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(required_power(1e9, 2e6, 1e8, 1e6) > 0.0);
  CHECK(required_power(1e9, 2e6, 1e8, 1e6) < 1e-10);
  CHECK(upload_energy(0.5, 2e6, 1e8, 1e6) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(upload_energy(0.5, 2e6, 2e8, 1e6) == doctest::Approx(0.005).epsilon(1e-14));
}

TEST_CASE("upload slot bounds") {
  DeviceBounds b;
  const Interval iv = upload_time_bounds(6e4, 0.1, b);
  CHECK(iv.lo == doctest::Approx(0.09994).epsilon(1e-12));
  CHECK(iv.hi == doctest::Approx(0.1 - 6e4 / 9e9).epsilon(1e-12));

  b.f_min = b.f_max = 2e9;
  const Interval point = upload_time_bounds(6e4, 0.1, b);
  CHECK(point.lo == point.hi);
  CHECK_THROWS_AS(upload_time_bounds(9e9, 1.0, DeviceBounds{}), InfeasibleDeadlineError);
}

TEST_CASE("bandwidth closed forms") {
  // Π just above one drives the denominator to zero.
  const double xi = 1e6;
  const double t = 1.0;
  const double p = 0.01;
  const double beta = xi * std::log(2.0) / (t * p * (1.0 + 1e-6));
  CHECK(optimal_bandwidth(t, p, beta, xi) > 1e10);
  CHECK_THROWS_AS(optimal_bandwidth(t, p, beta * 2.0, xi), InfeasibleBandwidthError);

  const double w = min_bandwidth_for_rate(t, p, beta * 2.0, xi);
  CHECK(w * std::log2(1.0 + beta * 2.0 * p / w) == doctest::Approx(xi / t).epsilon(1e-10));
}

TEST_CASE("single-point slot fixes the plan") {
  Workload w = workload(5, 600, 0);
  DeviceBounds b;
  b.f_min = b.f_max = 3e9;
  b.energy_budget = std::numeric_limits<double>::max();
  const double deadline = 0.2;
  const ResourcePlan plan = minimize_round_energy(w, deadline, 1e6, 1e9, b);
  CHECK(plan.f_cmp == doctest::Approx(3e9).epsilon(1e-12));
  CHECK(plan.t_up == doctest::Approx(deadline - 6e4 / 3e9).epsilon(1e-12));
  CHECK(plan.t_up + plan.t_cmp == doctest::Approx(deadline).epsilon(1e-15));
}

TEST_CASE("plan is no worse than either slot end") {
  Workload w = workload(5, 600, 100);
  w.cycles_per_sample = 1e5;
  DeviceBounds b;
  b.energy_budget = std::numeric_limits<double>::max();
  const double rho = effective_cycles(w);
  const double deadline = rho / 3e9 + 0.5;
  const ResourcePlan plan = minimize_round_energy(w, deadline, 1e6, 1e9, b);
  const Interval iv = upload_time_bounds(rho, deadline, b);
  CHECK(plan.total_energy() <= round_energy_objective(w, deadline, 1e6, 1e9, b, iv.lo));
  CHECK(plan.total_energy() <= round_energy_objective(w, deadline, 1e6, 1e9, b, iv.hi));
  CHECK(plan.p_up <= b.p_max);
  CHECK(plan.f_cmp >= b.f_min);
  CHECK(plan.f_cmp <= b.f_max);
}

TEST_CASE("budget and power failures") {
  Workload w = workload(5, 600, 0);
  DeviceBounds b;
  b.energy_budget = 1e-30;
  CHECK_THROWS_AS(minimize_round_energy(w, 0.2, 1e6, 1e9, b), BudgetExceededError);
  b.energy_budget = 1.0;
  CHECK_THROWS_AS(minimize_round_energy(w, 0.2, 1e6, 1e-6, b), InfeasiblePowerError);
}
