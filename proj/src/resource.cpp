#include "feel/resource.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "feel/channel.hpp"

namespace feel::resource {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Upload energy at a clamped power; below p_min the transmitter still runs at
// p_min and finishes early, so it pays p_min for the shorter airtime only.
double upload_energy_at(double t_up, double bandwidth_hz, double beta, double model_bits,
                        const DeviceBounds& bounds, double* power_out, bool* clamped_out) {
  double p = required_power(t_up, bandwidth_hz, beta, model_bits);
  // The slot reachable at p_max reproduces p_max only up to rounding.
  if (!(p <= bounds.p_max * (1.0 + 1e-12))) {
    return kInf;
  }
  p = std::min(p, bounds.p_max);
  if (p < bounds.p_min) {
    if (power_out) *power_out = bounds.p_min;
    if (clamped_out) *clamped_out = true;
    const double airtime = model_bits / channel::uplink_rate(bandwidth_hz, beta, bounds.p_min);
    return bounds.p_min * airtime;
  }
  if (power_out) *power_out = p;
  if (clamped_out) *clamped_out = false;
  return t_up * p;
}

bool is_unimodal(const std::vector<double>& values) {
  // Look for a rise followed by a fall; ignore differences at rounding level.
  bool rising = false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double a = values[i - 1];
    const double b = values[i];
    if (!std::isfinite(a) || !std::isfinite(b)) {
      continue;
    }
    const double d = b - a;
    if (std::abs(d) <= 1e-12 * std::max(std::abs(a), std::abs(b))) {
      continue;
    }
    if (d > 0) {
      rising = true;
    } else if (rising) {
      return false;
    }
  }
  return true;
}

void check_budget(const ResourcePlan& plan, const DeviceBounds& bounds) {
  if (plan.total_energy() > bounds.energy_budget) {
    throw BudgetExceededError("planned energy " + std::to_string(plan.total_energy()) +
                                  " J exceeds remaining budget " +
                                  std::to_string(bounds.energy_budget) + " J",
                              plan);
  }
}

}  // namespace

double effective_cycles(const Workload& w) {
  const double d = static_cast<double>(w.dataset_size);
  const double kappa = static_cast<double>(w.excluded);
  const double eps = static_cast<double>(w.epochs);
  return w.cycles_per_sample * (eps * d - kappa * (eps - 1.0));
}

double computation_time(double cycles, double f_hz) { return cycles / f_hz; }

double computation_energy(const Workload& w, double f_hz, double alpha) {
  const double d = static_cast<double>(w.dataset_size);
  const double kappa = static_cast<double>(w.excluded);
  const double eps = static_cast<double>(w.epochs);
  return alpha / 2.0 * f_hz * f_hz * w.cycles_per_sample * ((eps - 1.0) * (d - kappa) + d);
}

double required_power(double t_up, double bandwidth_hz, double beta, double model_bits) {
  const double exponent = model_bits / (t_up * bandwidth_hz);
  return bandwidth_hz * std::expm1(exponent * std::numbers::ln2) / beta;
}

double upload_energy(double t_up, double bandwidth_hz, double beta, double model_bits) {
  return t_up * required_power(t_up, bandwidth_hz, beta, model_bits);
}

Interval upload_time_bounds(double cycles, double deadline, const DeviceBounds& bounds) {
  const double fastest = cycles / bounds.f_max;
  if (deadline <= fastest || deadline - fastest < kMinUploadTime) {
    throw InfeasibleDeadlineError("deadline " + std::to_string(deadline) +
                                  " s leaves no upload time after " + std::to_string(fastest) +
                                  " s of computation at f_max");
  }
  const double hi = deadline - fastest;
  const double lo = std::max(kMinUploadTime, deadline - cycles / bounds.f_min);
  return {std::min(lo, hi), hi};
}

double optimal_bandwidth(double deadline_residual, double power_w, double beta, double model_bits) {
  const double pi = model_bits * std::numbers::ln2 / (deadline_residual * power_w * beta);
  if (!(pi > 1.0)) {
    throw InfeasibleBandwidthError("optimal_bandwidth: Π = " + std::to_string(pi) +
                                   " <= 1, denominator vanishes on the principal branch");
  }
  const double w0 = numerics::lambert_w0(-pi * std::exp(-pi));
  return model_bits * std::numbers::ln2 / (deadline_residual * (w0 + pi));
}

double min_bandwidth_for_rate(double deadline_residual, double power_w, double beta,
                              double model_bits) {
  const double pi = model_bits * std::numbers::ln2 / (deadline_residual * power_w * beta);
  if (!(pi < 1.0) || !(pi > 0.0)) {
    throw InfeasibleBandwidthError("min_bandwidth_for_rate: Π = " + std::to_string(pi) +
                                   " >= 1, rate ξ/t exceeds βP/ln2 for any bandwidth");
  }
  const double wm1 = numerics::lambert_wm1(-pi * std::exp(-pi));
  return -model_bits * std::numbers::ln2 / (deadline_residual * (wm1 + pi));
}

double round_energy_objective(const Workload& w, double deadline, double bandwidth_hz, double beta,
                              const DeviceBounds& bounds, double t_up) {
  const double rho = effective_cycles(w);
  const double t_cmp = deadline - t_up;
  const double e_up = upload_energy_at(t_up, bandwidth_hz, beta, w.model_bits, bounds, nullptr, nullptr);
  if (!std::isfinite(e_up) || !(t_cmp > 0.0)) {
    return kInf;
  }
  // A slot longer than ρ/f_min still runs at f_min and idles.
  const double f = std::max(rho / t_cmp, bounds.f_min);
  return computation_energy(w, f, bounds.capacitance_alpha) + e_up;
}

ResourcePlan minimize_round_energy(const Workload& w, double deadline, double bandwidth_hz,
                                   double beta, const DeviceBounds& bounds,
                                   const OptimizerOptions& options) {
  const double rho = effective_cycles(w);
  ResourcePlan plan;
  plan.bandwidth_hz = bandwidth_hz;

  double t_up;
  if (rho <= 0.0) {
    // Nothing to compute: the whole round is upload time.
    t_up = deadline;
    if (!std::isfinite(upload_energy_at(t_up, bandwidth_hz, beta, w.model_bits, bounds, nullptr, nullptr))) {
      throw InfeasiblePowerError("p_max cannot deliver the model within the deadline");
    }
  } else {
    Interval slot = upload_time_bounds(rho, deadline, bounds);
    const double reachable =
        w.model_bits / channel::uplink_rate(bandwidth_hz, beta, bounds.p_max);
    if (reachable > slot.hi) {
      throw InfeasiblePowerError("p_max needs " + std::to_string(reachable) +
                                 " s to upload but at most " + std::to_string(slot.hi) +
                                 " s are available");
    }
    slot.lo = std::max(slot.lo, reachable);

    const auto objective = [&](double t) {
      return round_energy_objective(w, deadline, bandwidth_hz, beta, bounds, t);
    };

    bool fallback = false;
    if (options.check_unimodality && slot.width() > 0.0 && options.unimodality_grid >= 3) {
      const std::size_t n = options.unimodality_grid;
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) {
        values[i] = objective(slot.lo + slot.width() * static_cast<double>(i) / static_cast<double>(n - 1));
      }
      if (!is_unimodal(values)) {
        fallback = true;
        const auto best = std::min_element(values.begin(), values.end()) - values.begin();
        t_up = slot.lo + slot.width() * static_cast<double>(best) / static_cast<double>(n - 1);
      }
    }
    if (!fallback) {
      const double tol = options.relative_tol * slot.width();
      t_up = numerics::golden_section_min(objective, slot, tol, options.max_iter).argmin;
    }
    plan.unimodality_fallback = fallback;
  }

  plan.t_up = t_up;
  plan.t_cmp = deadline - t_up;
  plan.e_up = upload_energy_at(t_up, bandwidth_hz, beta, w.model_bits, bounds, &plan.p_up,
                               &plan.power_clamped);
  if (rho > 0.0) {
    plan.f_cmp = std::clamp(rho / plan.t_cmp, bounds.f_min, bounds.f_max);
  } else {
    plan.f_cmp = bounds.f_min;
  }
  plan.e_cmp = rho > 0.0 ? computation_energy(w, plan.f_cmp, bounds.capacitance_alpha) : 0.0;

  check_budget(plan, bounds);
  return plan;
}

ResourcePlan naive_round_plan(const Workload& w, double deadline, double bandwidth_hz, double beta,
                              const DeviceBounds& bounds) {
  const double rho = effective_cycles(w);
  ResourcePlan plan;
  plan.bandwidth_hz = bandwidth_hz;
  plan.f_cmp = bounds.f_max;
  plan.t_cmp = rho / bounds.f_max;
  plan.p_up = bounds.p_max;
  plan.t_up = w.model_bits / channel::uplink_rate(bandwidth_hz, beta, bounds.p_max);
  if (plan.t_cmp + plan.t_up > deadline) {
    throw InfeasibleDeadlineError("race-to-idle schedule needs " +
                                  std::to_string(plan.t_cmp + plan.t_up) + " s, deadline is " +
                                  std::to_string(deadline) + " s");
  }
  plan.e_cmp = computation_energy(w, plan.f_cmp, bounds.capacitance_alpha);
  plan.e_up = plan.p_up * plan.t_up;
  check_budget(plan, bounds);
  return plan;
}

}  // namespace feel::resource
