#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "extclosed/structure.hpp"

namespace extclosed {

struct Term {
  enum class Kind { Variable, Constant };
  Kind kind = Kind::Variable;
  std::string name;

  static Term var(std::string name) { return {Kind::Variable, std::move(name)}; }
  static Term constant(std::string name) { return {Kind::Constant, std::move(name)}; }
  bool is_variable() const noexcept { return kind == Kind::Variable; }
  bool operator==(const Term&) const = default;
};

enum class FormulaKind { True, False, Atom, Equal, Not, And, Or, Implies, Exists, Forall };

struct FormulaNode;

/// Immutable first-order formula. Copies share structure, so subformulas can
/// be reused freely across larger formulas.
class Formula {
 public:
  static Formula truth();
  static Formula falsity();
  static Formula atom(std::string relation, std::vector<Term> args);
  static Formula equal(Term lhs, Term rhs);
  /// Order atom `lhs <= rhs`.
  static Formula le(Term lhs, Term rhs);
  /// Strict order, spelled `lhs <= rhs & !(lhs = rhs)`.
  static Formula lt(Term lhs, Term rhs);
  static Formula negation(Formula f);
  static Formula conjunction(std::vector<Formula> parts);
  static Formula disjunction(std::vector<Formula> parts);
  static Formula implication(Formula lhs, Formula rhs);
  static Formula exists(std::string var, Formula body);
  static Formula forall(std::string var, Formula body);
  static Formula exists(const std::vector<std::string>& vars, Formula body);
  static Formula forall(const std::vector<std::string>& vars, Formula body);

  FormulaKind kind() const noexcept;
  /// Atom relation name.
  const std::string& relation() const;
  /// Atom arguments, or the two sides of an equality.
  const std::vector<Term>& terms() const;
  const std::vector<Formula>& children() const;
  const Formula& child(std::size_t i = 0) const { return children().at(i); }
  /// Bound variable of a quantifier.
  const std::string& variable() const;

  bool is_quantifier() const noexcept {
    return kind() == FormulaKind::Exists || kind() == FormulaKind::Forall;
  }
  bool is_literal_atom() const noexcept {
    return kind() == FormulaKind::Atom || kind() == FormulaKind::Equal;
  }
  /// Identity of the shared node; stable for the lifetime of the formula.
  const void* id() const noexcept { return node_.get(); }

  /// Structural equality.
  bool operator==(const Formula& other) const;

 private:
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const FormulaNode> node_;
};

std::set<std::string> free_variables(const Formula& f);
/// Every variable name occurring in f, bound or free.
std::set<std::string> all_variables(const Formula& f);
inline bool is_sentence(const Formula& f) { return free_variables(f).empty(); }
/// Number of nodes in tree form (shared subformulas counted per occurrence).
std::size_t formula_size(const Formula& f);

/// Throws VocabularyError unless every atom and constant matches `vocab`.
void check_vocabulary(const Formula& f, const Vocabulary& vocab);

/// Deterministic concrete syntax; parse_formula(to_string(f)) == f.
std::string to_string(const Formula& f);

/// Parses `exists x.`, `forall x.`, `!`, `&`, `|`, `->`, `=`, `<=`, `true`,
/// `false`, and atoms `Name(t, ...)`. Identifiers naming a constant of `vocab`
/// are constants, all others variables. Throws ParseError / VocabularyError.
Formula parse_formula(std::string_view text, const Vocabulary& vocab);

/// Replace free occurrences of variable `from` with the term `to`.
Formula substitute(const Formula& f, const std::string& from, const Term& to);

/// Relativize every quantifier to the interval [x, y] and conjoin `x <= y`.
/// Bound variables of f named x or y are renamed first. Guards are read as
/// exists z ((x <= z & z <= y) & body) and forall z ((x <= z & z <= y) -> body).
Formula relativize(const Formula& f, const std::string& x, const std::string& y);

/// Implications eliminated and negations pushed onto atoms.
Formula to_nnf(const Formula& f);

/// Prenex form, logically equivalent to f. Quantifier blocks of the
/// subformulas of each connective are interleaved greedily so that blocks
/// of equal polarity merge before an alternation is emitted.
Formula to_pnf(const Formula& f);

bool is_prenex(const Formula& f);

struct PrefixClass {
  enum class Kind { Sigma, Pi };
  Kind kind = Kind::Sigma;
  int blocks = 0;
  int width = 0;

  bool operator==(const PrefixClass&) const = default;
};

/// Sigma/Pi by the leading block, the number of maximal like-quantifier runs,
/// and the longest run. Quantifier-free formulas are Sigma with 0 blocks.
/// Throws Error for non-prenex input.
PrefixClass classify_prefix(const Formula& f);
std::string to_string(const PrefixClass& c);

}  // namespace extclosed
