#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracross/config.hpp"

namespace fracross {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      ///< measured quantity
  double threshold = 0.0;  ///< bound it is compared against
  std::string detail;
};

/// Runs the invariant suite using the model of `config` where it matters.
std::vector<CheckResult> run_check_suite(const RunConfig& config, std::uint64_t seed = 1);

/// Fixed-width pass/fail table.
std::string format_check_table(const std::vector<CheckResult>& results);

}  // namespace fracross
