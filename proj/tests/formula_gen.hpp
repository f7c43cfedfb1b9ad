#pragma once

#include <random>
#include <string>
#include <vector>

#include "extclosed/formula.hpp"

namespace testing {

// Random formulas over {<=, S, R, U}; `vars` are in scope, depth bounds nesting.
class FormulaGen {
 public:
  explicit FormulaGen(std::uint64_t seed) : rng_(seed) {}

  extclosed::Formula sentence(int depth) { return gen(depth, {}); }

  // Existential-positive in spirit: quantifiers only existential, negation only on atoms.
  extclosed::Formula existential_sentence(int depth) { return exist(depth, {}); }

 private:
  using F = extclosed::Formula;
  using T = extclosed::Term;

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  F atom(const std::vector<std::string>& vars) {
    if (vars.empty()) return pick(2) ? F::truth() : F::falsity();
    auto v = [&] { return T::var(vars[static_cast<std::size_t>(pick(static_cast<int>(vars.size())))]); };
    switch (pick(5)) {
      case 0:
        return F::le(v(), v());
      case 1:
        return F::atom("S", {v(), v()});
      case 2:
        return F::atom("R", {v(), v()});
      case 3:
        return F::atom("U", {v()});
      default:
        return F::equal(v(), v());
    }
  }

  F gen(int depth, std::vector<std::string> vars) {
    if (depth == 0) return atom(vars);
    switch (pick(vars.empty() ? 2 : 7)) {
      case 0:
      case 1: {
        vars.push_back("v" + std::to_string(vars.size()));
        F body = gen(depth - 1, vars);
        return pick(2) ? F::exists(vars.back(), body) : F::forall(vars.back(), body);
      }
      case 2:
        return F::negation(gen(depth - 1, vars));
      case 3:
        return F::conjunction({gen(depth - 1, vars), gen(depth - 1, vars)});
      case 4:
        return F::disjunction({gen(depth - 1, vars), gen(depth - 1, vars)});
      case 5:
        return F::implication(gen(depth - 1, vars), gen(depth - 1, vars));
      default:
        return atom(vars);
    }
  }

  F exist(int depth, std::vector<std::string> vars) {
    if (depth == 0 || (!vars.empty() && pick(4) == 0)) {
      F a = atom(vars);
      return pick(3) == 0 ? F::negation(a) : a;
    }
    switch (pick(vars.empty() ? 1 : 3)) {
      case 0: {
        vars.push_back("v" + std::to_string(vars.size()));
        return F::exists(vars.back(), exist(depth - 1, vars));
      }
      case 1:
        return F::conjunction({exist(depth - 1, vars), exist(depth - 1, vars)});
      default:
        return F::disjunction({exist(depth - 1, vars), exist(depth - 1, vars)});
    }
  }

  std::mt19937_64 rng_;
};

}  // namespace testing
