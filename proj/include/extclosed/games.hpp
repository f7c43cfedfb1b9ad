#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "extclosed/structure.hpp"

namespace extclosed {

/// The (n,k)-prefix game between A and B: in round r Spoiler picks a
/// k-tuple in A (r odd) or B (r even) and Duplicator answers in the other
/// structure. Duplicator wins iff the accumulated map from A to B is a
/// partial isomorphism.
struct GameSpec {
  int n = 1;
  int k = 1;
  /// Also respect min and max (the game between A* and B*).
  bool starred = false;
  /// Parameters a -> b fixed before the first round.
  PartialMap initial;
};

struct GameVerdict {
  /// Duplicator wins, i.e. A =>_{n,k} B.
  bool holds = false;
  /// Present iff !holds: a first-round Spoiler tuple Duplicator cannot
  /// answer, or an empty tuple when the initial map already fails.
  std::optional<std::vector<Element>> witness;
  /// Game states expanded.
  std::uint64_t states = 0;
};

struct GameOptions {
  /// Maximum number of expanded states before BudgetExceeded is thrown.
  std::uint64_t budget = 100'000'000;
  /// Worker threads for the first round.
  int threads = 1;
};

/// Decides A =>_{n,k} B. States are memoized on (rounds left, partial map);
/// Spoiler tuples are enumerated as nondecreasing tuples since only the
/// set of chosen elements matters. Throws VocabularyError if the
/// vocabularies differ, StructureError if starred and unordered,
/// BudgetExceeded when the budget runs out.
GameVerdict prefix_implies(const Structure& A, const Structure& B, const GameSpec& spec,
                           const GameOptions& options = {});

/// Both directions; the initial map is inverted for the second.
bool prefix_equiv(const Structure& A, const Structure& B, const GameSpec& spec, const GameOptions& options = {});

/// The usual m-round Ehrenfeucht-Fraisse game (quantifier rank m).
bool rank_equiv(const Structure& A, const Structure& B, int m, const GameOptions& options = {});

/// Reference search over full move histories: every k-tuple for both
/// players, no memo, and a single partial-isomorphism test per complete
/// play. Refuses (BudgetExceeded) when (|A|^k |B|^k)^n exceeds the budget.
GameVerdict naive_game_search(const Structure& A, const Structure& B, const GameSpec& spec,
                              const GameOptions& options = {});

struct CompositionCheck {
  bool hypothesis = false;
  bool conclusion = false;
  /// A counterexample to the composition law iff false.
  bool holds() const { return !hypothesis || conclusion; }
};

/// Whether (A1,a1)* => (B1,b1)* and (A2,a2)* => (B2,b2)* imply
/// (A1+A2, a1a2)* => (B1+B2, b1b2)*, at spec.n, spec.k.
CompositionCheck check_ordered_sum_composition(const Structure& A1, const Structure& A2, const Structure& B1,
                                               const Structure& B2, const GameSpec& spec,
                                               const PartialMap& params1 = {}, const PartialMap& params2 = {},
                                               const GameOptions& options = {});

/// Whether A* => B* implies A_U => B_U (unary U) or A_T => B_T (binary T),
/// where the expansion adds min and max to U, or (min, max) to T.
CompositionCheck check_minmax_composition(const Structure& A, const Structure& B, const GameSpec& spec,
                                          const std::string& symbol, int arity, const GameOptions& options = {});

}  // namespace extclosed
