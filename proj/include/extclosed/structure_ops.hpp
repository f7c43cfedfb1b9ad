#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "extclosed/structure.hpp"

namespace extclosed {

/// True iff `<=` is a linear order of the universe. Throws VocabularyError when
/// the vocabulary has no binary `<=`.
bool check_ordered(const Structure& a);

/// rank[e] is the 1-based position of e in the order (rank[0] unused).
/// Throws StructureError when the structure is not ordered.
std::vector<int> order_ranks(const Structure& a);

/// True iff every S-tuple (x, y) has y the immediate successor of x.
/// Requires an ordered structure with a binary S.
bool check_partial_successor(const Structure& a);

/// Relabel an ordered structure so that element i is the i-th element of the order.
Structure normalize_order(const Structure& a);

/// A followed by B with max(A) identified with min(B). Both inputs must be
/// ordered, share a vocabulary, and carry no constants. Size is |A| + |B| - 1.
Structure ordered_sum(const Structure& a, const Structure& b);
/// Left fold of ordered_sum over a nonempty sequence.
Structure ordered_sum_seq(std::span<const Structure> items);

/// Adds constants `min` and `max` for the least and greatest elements.
Structure star_expand(const Structure& a);

/// Puts min and max into the unary symbol `unary` and (min, max) into the
/// binary symbol `binary`; either may be omitted. Missing symbols are added
/// to the vocabulary with only the new content.
Structure minmax_expand(const Structure& a, const std::optional<std::string>& unary,
                        const std::optional<std::string>& binary);

/// Whether `map` (plus, with respect_constants, each pair of like-named
/// constants) is an injective function preserving and reflecting every
/// relation. Both structures must share a vocabulary.
bool is_partial_isomorphism(const Structure& a, const Structure& b, const PartialMap& map,
                            bool respect_constants);

/// Substructure induced on the order interval [lo, hi], relabeled to 1..m.
Structure induced_substructure(const Structure& a, Element lo, Element hi);

/// Substructure induced on an arbitrary nonempty set, relabeled in index order.
Structure substructure(const Structure& a, std::vector<Element> elements);

/// Drop every symbol not in `vocab`, which must be a subset of a's vocabulary.
Structure reduct(const Structure& a, const Vocabulary& vocab);

/// Re-express `a` over the larger relational vocabulary `vocab` (same
/// constants); new relations are empty.
Structure expand_vocabulary(const Structure& a, const Vocabulary& vocab);

/// An isomorphism as a map from elements of A to elements of B
/// (index 0 unused), if one exists. Ordered inputs take the order-preserving
/// fast path; others fall back to backtracking (small structures only).
std::optional<std::vector<Element>> find_isomorphism(const Structure& a, const Structure& b);
inline bool are_isomorphic(const Structure& a, const Structure& b) { return find_isomorphism(a, b).has_value(); }

struct SerializeOptions {
  /// Emit `order <name>` instead of listing every tuple of a natural order table.
  bool compact_order = false;
};

std::string serialize(const Structure& a, SerializeOptions options = {});
/// Throws ParseError with a line number on malformed input.
Structure parse_structure(std::string_view text);

}  // namespace extclosed
