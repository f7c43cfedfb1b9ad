#include "doctest.h"

#include "extclosed/errors.hpp"
#include "extclosed/verify.hpp"

using namespace extclosed;

TEST_CASE("suites") {
  CHECK_THROWS_AS(run_suite("nosuch"), Error);
  const SuiteReport r = run_suite("composition");
  CHECK(r.passed());
  CHECK(std::is_sorted(r.checks.begin(), r.checks.end(),
                       [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; }));
  for (const auto& c : r.checks) CHECK_FALSE(c.claim.empty());

  VerifyOptions o;
  o.seed = 99;
  o.trials = 20;
  const SuiteReport a = run_suite("composition", o), b = run_suite("composition", o);
  REQUIRE(a.checks.size() == b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) CHECK(a.checks[i].detail == b.checks[i].detail);
  CHECK(format_report(a).find("composition.minmax") != std::string::npos);
}

TEST_CASE("refusals are not failures") {
  VerifyOptions o;
  o.budget = 3;
  const SuiteReport r = run_suite("linear-orders", o);
  bool refused = false;
  for (const auto& c : r.checks) refused = refused || c.status == CheckStatus::RefusedBudget;
  CHECK(refused);
  CHECK(to_string(CheckStatus::RefusedBudget) == "refused-budget");
}
