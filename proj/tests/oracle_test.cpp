#include "doctest.h"

#include "feel/selftest.hpp"

// Every oracle comparison and invariant suite as its own test case.
TEST_CASE("oracle and invariant checks") {
  for (const auto& check : feel::selftest::oracle_checks()) {
    SUBCASE(check.name.c_str()) {
      const auto r = check.run();
      INFO(r.detail);
      CHECK(r.passed);
    }
  }
}
