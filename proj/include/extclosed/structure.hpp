#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace extclosed {

/// Name of the binary symbol interpreted as the linear order.
inline constexpr std::string_view kOrderSymbol = "<=";
/// Name of the (partial) successor symbol.
inline constexpr std::string_view kSuccSymbol = "S";

/// Universe elements are 1-based indices 1..size.
using Element = int;
using ElementPair = std::pair<Element, Element>;
/// Pairs (a, b) of a map from the universe of A to the universe of B.
using PartialMap = std::vector<ElementPair>;

struct RelationSymbol {
  std::string name;
  int arity = 0;

  bool operator==(const RelationSymbol&) const = default;
};

/// Relation and constant symbols. Names are unique across both kinds and
/// every relation is unary or binary.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<RelationSymbol> relations, std::vector<std::string> constants = {});

  const std::vector<RelationSymbol>& relations() const noexcept { return relations_; }
  const std::vector<std::string>& constants() const noexcept { return constants_; }

  std::optional<std::size_t> relation_index(std::string_view name) const;
  std::optional<std::size_t> constant_index(std::string_view name) const;
  bool has_relation(std::string_view name) const { return relation_index(name).has_value(); }
  bool has_constant(std::string_view name) const { return constant_index(name).has_value(); }
  /// Throws VocabularyError when the relation is unknown.
  int arity(std::string_view name) const;

  Vocabulary with_relation(RelationSymbol symbol) const;
  Vocabulary with_constant(std::string name) const;

  /// Every relation (with equal arity) and constant of *this occurs in `other`.
  bool is_subset_of(const Vocabulary& other) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<RelationSymbol> relations_;
  std::vector<std::string> constants_;
};

/// Immutable table of a unary or binary relation over 1..size.
///
/// Binary tables equal to {(i, j) : i <= j} are stored implicitly; every
/// other binary table is kept in compressed adjacency form with sorted
/// successor and predecessor lists.
class Relation {
 public:
  static Relation unary(int size, std::vector<Element> members);
  static Relation binary(int size, std::vector<ElementPair> tuples);
  static Relation natural_order(int size);

  int arity() const noexcept { return arity_; }
  int universe_size() const noexcept { return size_; }
  bool is_natural_order() const noexcept { return natural_; }

  bool contains(Element a) const;
  bool contains(Element a, Element b) const;
  std::size_t cardinality() const noexcept;

  /// Unary relations: sorted members.
  const std::vector<Element>& members() const noexcept { return members_; }

  /// Explicit binary relations only (not natural order).
  std::span<const Element> successors(Element a) const;
  std::span<const Element> predecessors(Element b) const;
  /// Elements with at least one outgoing / incoming tuple, and reflexive tuples.
  const std::vector<Element>& sources() const noexcept { return sources_; }
  const std::vector<Element>& targets() const noexcept { return targets_; }
  const std::vector<Element>& loops() const noexcept { return loops_; }

  /// Lexicographically sorted tuples (materialized even for the natural order).
  std::vector<ElementPair> pairs() const;

  bool operator==(const Relation& other) const;

 private:
  int arity_ = 0;
  int size_ = 0;
  bool natural_ = false;
  std::vector<Element> members_;
  std::vector<char> bitmap_;
  std::vector<std::size_t> out_offsets_;
  std::vector<Element> out_;
  std::vector<std::size_t> in_offsets_;
  std::vector<Element> in_;
  std::vector<Element> sources_;
  std::vector<Element> targets_;
  std::vector<Element> loops_;
};

/// A finite structure with universe 1..size. Immutable; copies share tables.
class Structure {
 public:
  Structure(Vocabulary vocab, int size, std::vector<Relation> tables, std::vector<Element> constants);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  int size() const noexcept { return size_; }

  const Relation& relation(std::size_t index) const { return *tables_.at(index); }
  /// Throws VocabularyError for an unknown name.
  const Relation& relation(std::string_view name) const;
  Element constant(std::string_view name) const;
  const std::vector<Element>& constants() const noexcept { return constants_; }

  bool operator==(const Structure& other) const;

 private:
  Vocabulary vocab_;
  int size_;
  std::vector<std::shared_ptr<const Relation>> tables_;
  std::vector<Element> constants_;
};

/// Accumulates tuples and constants, then validates and freezes a Structure.
class StructureBuilder {
 public:
  StructureBuilder(Vocabulary vocab, int size);

  StructureBuilder& add(std::string_view relation, Element a);
  StructureBuilder& add(std::string_view relation, Element a, Element b);
  /// Replace the table with {(i, j) : i <= j}.
  StructureBuilder& set_natural_order(std::string_view relation);
  StructureBuilder& set_constant(std::string_view name, Element value);

  Structure build() const;

 private:
  std::size_t index_of(std::string_view relation, int arity) const;
  void check_element(Element e) const;

  Vocabulary vocab_;
  int size_;
  std::vector<std::vector<Element>> unary_;
  std::vector<std::vector<ElementPair>> binary_;
  std::vector<char> natural_;
  std::vector<std::optional<Element>> constants_;
};

}  // namespace extclosed
