// One line per acceptance criterion, built from the checks of the verify
// suites; exits nonzero if any criterion fails.
#include <cstdio>
#include <map>
#include <string>

#include "extclosed/verify.hpp"

using namespace extclosed;

int main() {
  struct Criterion {
    const char* title;
    double limit_seconds;  // 0: no limit
  };
  const std::map<int, Criterion> criteria = {
      {1, {"satisfaction of SomeTotalR_n on M, not on N (FO and Datalog)", 60}},
      {2, {"FO / Datalog cross-validation", 120}},
      {3, {"prefix classes of SomeTotalR_n and phi_n", 0}},
      {4, {"Tot(1,1) =>_{2,1} Gap(1,1) at full scale", 600}},
      {5, {"successor, gap and linear-order instances", 60}},
      {6, {"memoized vs naive game search", 0}},
      {7, {"composition oracles", 0}},
      {8, {"arithmetic invariants", 0}},
      {9, {"extension-closure fuzzing", 0}},
  };

  const SuiteReport report = run_suite("all");
  bool all_ok = true;
  for (const auto& [id, c] : criteria) {
    double seconds = 0;
    bool ok = true;
    int count = 0;
    for (const auto& r : report.checks) {
      if (r.criterion != id) continue;
      ++count;
      seconds += r.seconds;
      ok = ok && r.status == CheckStatus::Pass;
    }
    const bool in_time = c.limit_seconds == 0 || seconds <= c.limit_seconds;
    ok = ok && count > 0 && in_time;
    all_ok = all_ok && ok;
    std::printf("criterion %d: %s  %s (%d checks, %.2fs%s)\n", id, ok ? "PASS" : "FAIL", c.title, count, seconds,
                in_time ? "" : ", over the time limit");
    for (const auto& r : report.checks)
      if (r.criterion == id)
        std::printf("    %-14s %-30s %s\n", std::string(to_string(r.status)).c_str(), r.id.c_str(), r.detail.c_str());
  }
  std::printf("supplementary checks:\n");
  for (const auto& r : report.checks)
    if (r.criterion == 0)
      std::printf("    %-14s %-30s %s\n", std::string(to_string(r.status)).c_str(), r.id.c_str(), r.detail.c_str());
  return all_ok ? 0 : 1;
}
