#pragma once

#include <cstddef>
#include <cstdint>

#include "feel/errors.hpp"
#include "feel/numerics.hpp"

namespace feel {

/// Per-device CPU and radio limits. Frequencies in Hz, powers in W,
/// capacitance in J·s², budget in J.
struct DeviceBounds {
  double f_min = 1e9;
  double f_max = 9e9;
  double p_min = 1e-4;
  double p_max = 0.1;
  double capacitance_alpha = 2e-28;
  double energy_budget = 1e3;
};

/// Local training workload of one round.
struct Workload {
  std::uint64_t dataset_size = 0;  // |D_k|
  std::uint64_t excluded = 0;      // κ
  std::uint32_t epochs = 1;        // ε
  double cycles_per_sample = 20.0;
  double model_bits = 0.0;  // ξ
};

/// Optimised round schedule for one worker. t_up + t_cmp equals the round
/// deadline.
struct ResourcePlan {
  double t_up = 0.0;
  double t_cmp = 0.0;
  double f_cmp = 0.0;
  double p_up = 0.0;
  double bandwidth_hz = 0.0;
  double e_cmp = 0.0;
  double e_up = 0.0;
  bool power_clamped = false;
  bool unimodality_fallback = false;

  [[nodiscard]] double total_energy() const { return e_cmp + e_up; }
};

/// Raised when the optimal plan exists but costs more than the energy budget.
class BudgetExceededError : public InfeasiblePowerError {
 public:
  BudgetExceededError(const std::string& what, ResourcePlan plan)
      : InfeasiblePowerError(what), plan_(plan) {}
  [[nodiscard]] const ResourcePlan& plan() const { return plan_; }

 private:
  ResourcePlan plan_;
};

struct OptimizerOptions {
  /// Golden-section stop width as a fraction of the initial search interval.
  double relative_tol = numerics::kDefaultGoldenTol;
  std::size_t max_iter = numerics::kDefaultGoldenMaxIter;
  /// Pre-scan the objective on a coarse grid and fall back to the grid
  /// argmin if it is not unimodal.
#ifdef NDEBUG
  bool check_unimodality = false;
#else
  bool check_unimodality = true;
#endif
  std::size_t unimodality_grid = 1000;
};

namespace resource {

/// Smallest upload slot admitted by upload_time_bounds, in seconds.
inline constexpr double kMinUploadTime = 1e-12;

/// ρ = Φ·(ε·|D| − κ·(ε − 1)) CPU cycles.
double effective_cycles(const Workload& w);

double computation_time(double cycles, double f_hz);

/// (α/2)·f²·Φ·[(ε − 1)(|D| − κ) + |D|]: the first epoch touches every sample,
/// the remaining ε − 1 only the included ones.
double computation_energy(const Workload& w, double f_hz, double alpha);

/// Power that achieves rate ξ/t_up over `bandwidth_hz`:
/// W·(2^(ξ/(t_up·W)) − 1)/β.
double required_power(double t_up, double bandwidth_hz, double beta, double model_bits);

/// t_up · required_power(t_up, ...).
double upload_energy(double t_up, double bandwidth_hz, double beta, double model_bits);

/// Upload slot range [T − ρ/f_min, T − ρ/f_max], lower end floored at
/// kMinUploadTime. Throws InfeasibleDeadlineError when T <= ρ/f_max.
Interval upload_time_bounds(double cycles, double deadline, const DeviceBounds& bounds);

/// Lambert-W bandwidth expression ξ·ln2 / (t·(W0(−Π·e^−Π) + Π)) with
/// Π = ξ·ln2/(t·P·β). Defined for Π > 1; throws InfeasibleBandwidthError
/// otherwise since the denominator vanishes.
double optimal_bandwidth(double deadline_residual, double power_w, double beta, double model_bits);

/// Smallest bandwidth W with W·log2(1 + βP/W) >= ξ/t:
/// −ξ·ln2 / (t·(W−1(−Π·e^−Π) + Π)). Requires Π < 1 (the rate is bounded by
/// βP/ln2 as W grows); throws InfeasibleBandwidthError otherwise.
double min_bandwidth_for_rate(double deadline_residual, double power_w, double beta,
                              double model_bits);

/// Per-worker energy minimisation over the upload slot. The objective is
/// E_cmp(f = ρ/(T − t_up)) + E_up(t_up), with t_up searched by golden
/// section on the slot range intersected with the slots reachable at p_max.
///
/// Throws InfeasibleDeadlineError, InfeasiblePowerError (p_max cannot deliver
/// the model in any admissible slot) or BudgetExceededError.
ResourcePlan minimize_round_energy(const Workload& w, double deadline, double bandwidth_hz,
                                   double beta, const DeviceBounds& bounds,
                                   const OptimizerOptions& options = {});

/// Total planned energy at a given upload slot; +inf where p_max is not enough.
/// This is the function minimize_round_energy searches.
double round_energy_objective(const Workload& w, double deadline, double bandwidth_hz, double beta,
                              const DeviceBounds& bounds, double t_up);

/// Race-to-idle schedule: compute at f_max, upload immediately at p_max.
ResourcePlan naive_round_plan(const Workload& w, double deadline, double bandwidth_hz, double beta,
                              const DeviceBounds& bounds);

}  // namespace resource
}  // namespace feel
