#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace extclosed {

enum class CheckStatus { Pass, Fail, RefusedBudget };
std::string_view to_string(CheckStatus s);

struct CheckResult {
  std::string id;
  /// The statement being checked, in words.
  std::string claim;
  /// Acceptance criterion this check belongs to, 0 for supplementary checks.
  int criterion = 0;
  CheckStatus status = CheckStatus::Pass;
  double seconds = 0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  int trials = 0;
  /// Sorted by id.
  std::vector<CheckResult> checks;

  /// No check failed; refused checks do not count as failures.
  bool passed() const;
};

struct VerifyOptions {
  std::uint64_t seed = 20230521;
  /// Trials for randomized checks; 0 keeps each check's default.
  int trials = 0;
  std::uint64_t budget = 100'000'000;
  int threads = 1;
};

/// paper, composition, linear-orders, cross-validate, all.
const std::vector<std::string>& suite_names();

/// Throws Error for an unknown suite.
SuiteReport run_suite(std::string_view suite, const VerifyOptions& options = {});

/// One line per check: status, id, time, detail.
std::string format_report(const SuiteReport& report);

}  // namespace extclosed
