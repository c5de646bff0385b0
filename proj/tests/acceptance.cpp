// Runs the numbered acceptance criteria and prints one line per criterion.

#include <cstdio>

#include "feel/selftest.hpp"

int main() {
  const auto checks = feel::selftest::acceptance_checks();
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto r = checks[i].run();
    std::printf("criterion %zu %s %s: %s (%.2f s)\n", i + 1, r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("%zu criteria, %d failed\n", checks.size(), failed);
  return failed == 0 ? 0 : 1;
}
