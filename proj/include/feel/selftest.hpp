#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace feel::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Acceptance checks, numbered as in the README.
CheckResult check_gradient_fd();          // 1
CheckResult check_optimizer_grid();       // 2
CheckResult check_lambert_residual();     // 3
CheckResult check_beam_optimality();      // 4
CheckResult check_closed_forms();         // 5
CheckResult check_protocol_invariants();  // 6
CheckResult check_fedavg_reduction();     // 7
CheckResult check_energy_trend();         // 8
CheckResult check_threshold_nesting();    // 9
CheckResult check_determinism();          // 10

struct NamedCheck {
  std::string name;
  std::function<CheckResult()> run;
};

std::vector<NamedCheck> acceptance_checks();

/// Brute-force oracle comparisons and invariant suites beyond the
/// acceptance list.
std::vector<NamedCheck> oracle_checks();

/// "PASS name: detail (t s)" / "FAIL ..." per check; true if all passed.
bool run_checks(const std::vector<NamedCheck>& checks, std::ostream& out);

/// Oracle suite followed by the acceptance suite.
bool run_selftest(std::ostream& out);

}  // namespace feel::selftest
