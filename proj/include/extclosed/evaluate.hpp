#pragma once

#include <map>
#include <memory>
#include <string>

#include "extclosed/formula.hpp"
#include "extclosed/structure.hpp"

namespace extclosed {

/// Values for the free variables of a formula.
using Assignment = std::map<std::string, Element>;

/// A formula compiled against one structure, reusable across assignments.
///
/// Quantifier blocks are evaluated by backtracking over their variables.
/// Candidates for a variable come from the cheapest guard among the block's
/// conjuncts: adjacency lists of positive atoms whose other arguments are
/// already bound, or an interval derived from the natural-order and equality
/// literals. Universal blocks search for a counterexample to their body.
class FormulaEvaluator {
 public:
  /// Throws VocabularyError if the formula does not fit the structure.
  FormulaEvaluator(const Structure& structure, const Formula& formula);
  ~FormulaEvaluator();
  FormulaEvaluator(FormulaEvaluator&&) noexcept;
  FormulaEvaluator& operator=(FormulaEvaluator&&) noexcept;

  /// Throws EvaluationError if a free variable is unassigned or out of range.
  bool evaluate(const Assignment& env = {}) const;

 private:
  struct Plan;
  std::unique_ptr<Plan> plan_;
};

/// Standard satisfaction with quantifiers ranging over 1..size.
bool evaluate(const Structure& structure, const Formula& formula, const Assignment& env = {});

}  // namespace extclosed
