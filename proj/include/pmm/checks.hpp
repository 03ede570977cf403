#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pmm {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the built-in acceptance checks 1-7 in order.
std::vector<CheckResult> run_checks(std::uint64_t seed = 0);

/// One line per check: `[PASS] 3 rotation-error-law: ...`.
std::string format_check(const CheckResult& r);

}  // namespace pmm
