#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "extclosed/formula.hpp"
#include "extclosed/structure.hpp"

namespace extclosed {

struct DatalogAtom {
  std::string predicate;
  std::vector<Term> args;

  bool operator==(const DatalogAtom&) const = default;
};

/// Body literal: an atom or an equality, possibly negated.
struct DatalogLiteral {
  enum class Kind { Atom, Equal };
  Kind kind = Kind::Atom;
  bool negated = false;
  DatalogAtom atom;  // for equalities: predicate empty, two args

  static DatalogLiteral positive(std::string predicate, std::vector<Term> args) {
    return {Kind::Atom, false, {std::move(predicate), std::move(args)}};
  }
  static DatalogLiteral negative(std::string predicate, std::vector<Term> args) {
    return {Kind::Atom, true, {std::move(predicate), std::move(args)}};
  }
  static DatalogLiteral equal(Term a, Term b, bool negated = false) {
    return {Kind::Equal, negated, {"", {std::move(a), std::move(b)}}};
  }

  bool operator==(const DatalogLiteral&) const = default;
};

struct DatalogRule {
  DatalogAtom head;
  std::vector<DatalogLiteral> body;

  bool operator==(const DatalogRule&) const = default;
};

struct DatalogProgram {
  Vocabulary extensional;
  /// Intensional predicates, arity 0..2.
  std::vector<RelationSymbol> intensional;
  /// 0-ary intensional goal; may be empty when the program is not a query.
  std::string goal;
  std::vector<DatalogRule> rules;

  const RelationSymbol* find_intensional(std::string_view name) const;
  bool operator==(const DatalogProgram&) const = default;
};

struct DatalogViolation {
  int rule = -1;     // -1: program level
  int literal = -1;  // -1: the head (or program level)
  std::string message;
};

/// Every violated well-formedness condition: heads intensional, arities,
/// declared symbols, negation only on extensional atoms and equalities, and
/// every head variable occurring in a positive body literal.
std::vector<DatalogViolation> violations(const DatalogProgram& program);
inline bool validate(const DatalogProgram& program) { return violations(program).empty(); }

using Tuple = std::vector<Element>;

struct FixpointInterpretation {
  /// Sorted tuples per intensional predicate; 0-ary predicates hold either
  /// nothing or the empty tuple.
  std::map<std::string, std::vector<Tuple>> tables;

  const std::vector<Tuple>& table(std::string_view name) const;
  bool contains(std::string_view name, const Tuple& t) const;
  bool operator==(const FixpointInterpretation&) const = default;
};

/// Least fixpoint by semi-naive iteration. Throws Error for an invalid
/// program, VocabularyError if the structure lacks an extensional symbol.
FixpointInterpretation eval_fixpoint(const DatalogProgram& program, const Structure& structure);
/// Reference evaluator: reapply every rule to the full tables until stable.
FixpointInterpretation eval_fixpoint_naive(const DatalogProgram& program, const Structure& structure);

/// Whether the 0-ary goal is derived. Only rules the goal depends on are
/// evaluated, and evaluation stops once the goal is derived.
/// Throws Error if the goal is missing or not 0-ary.
bool goal_holds(const DatalogProgram& program, const Structure& structure);

/// Text format, one item per line:
///   .extensional Name/arity   .intensional Name/arity   .constant name   .goal Name
///   Head(x, y) :- Lit, Lit, ...
/// Literals: `P(x, y)`, `not P(x)`, `x = y`, `x != y`, `x <= y`, `not x <= y`.
/// `#` starts a comment. Identifiers declared as constants are constants.
DatalogProgram parse_program(std::string_view text);
std::string to_string(const DatalogProgram& program);
std::string to_string(const DatalogRule& rule);

struct ExtensionSampleReport {
  int trials = 0;
  int failures = 0;
  std::vector<std::string> counterexamples;
};

/// Random extensions of A (new elements inserted anywhere in the order, new
/// tuples touching them) on which the goal must stay true.
ExtensionSampleReport check_extension_closed_sample(const DatalogProgram& program, const Structure& structure,
                                                    int trials, std::uint64_t seed);

}  // namespace extclosed
