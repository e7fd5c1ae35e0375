#pragma once

// Theory-versus-simulation acceptance checks.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace dynetrack {

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
  bool informational = false;  ///< reported only, never fails a criterion
};

struct ValidationOptions {
  std::uint64_t seed = 20021;
  std::uint64_t n_traj = 200;
  unsigned threads = 0;
  std::vector<int> criteria;  ///< empty: all of 1..9
  std::function<void(const std::string&)> progress;
};

/// Runs the selected criteria and returns one result per individual check.
std::vector<CheckResult> run_validation_suite(const ValidationOptions& options = {});

/// Criterion number -> all of its checks passed.
struct CriterionSummary {
  int criterion = 0;
  bool passed = false;
  int checks = 0;
};
std::vector<CriterionSummary> summarize(const std::vector<CheckResult>& results);

/// Per-check table followed by one PASS/FAIL line per criterion.
void print_validation_report(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace dynetrack
