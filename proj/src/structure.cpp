#include "extclosed/structure.hpp"

#include <algorithm>
#include <set>

#include "extclosed/errors.hpp"

namespace extclosed {

Vocabulary::Vocabulary(std::vector<RelationSymbol> relations, std::vector<std::string> constants)
    : relations_(std::move(relations)), constants_(std::move(constants)) {
  std::set<std::string, std::less<>> seen;
  for (const auto& r : relations_) {
    if (r.arity != 1 && r.arity != 2)
      throw VocabularyError("relation '" + r.name + "' has arity " + std::to_string(r.arity) +
                            "; only unary and binary symbols are supported");
    if (r.name.empty()) throw VocabularyError("empty relation name");
    if (!seen.insert(r.name).second) throw VocabularyError("duplicate symbol '" + r.name + "'");
  }
  for (const auto& c : constants_) {
    if (c.empty()) throw VocabularyError("empty constant name");
    if (!seen.insert(c).second) throw VocabularyError("duplicate symbol '" + c + "'");
  }
}

std::optional<std::size_t> Vocabulary::relation_index(std::string_view name) const {
  for (std::size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Vocabulary::constant_index(std::string_view name) const {
  for (std::size_t i = 0; i < constants_.size(); ++i)
    if (constants_[i] == name) return i;
  return std::nullopt;
}

int Vocabulary::arity(std::string_view name) const {
  auto idx = relation_index(name);
  if (!idx) throw VocabularyError("unknown relation '" + std::string(name) + "'");
  return relations_[*idx].arity;
}

Vocabulary Vocabulary::with_relation(RelationSymbol symbol) const {
  auto rels = relations_;
  rels.push_back(std::move(symbol));
  return Vocabulary(std::move(rels), constants_);
}

Vocabulary Vocabulary::with_constant(std::string name) const {
  auto consts = constants_;
  consts.push_back(std::move(name));
  return Vocabulary(relations_, std::move(consts));
}

bool Vocabulary::is_subset_of(const Vocabulary& other) const {
  for (const auto& r : relations_) {
    auto idx = other.relation_index(r.name);
    if (!idx || other.relations_[*idx].arity != r.arity) return false;
  }
  return std::all_of(constants_.begin(), constants_.end(),
                     [&](const std::string& c) { return other.has_constant(c); });
}

// ---------------------------------------------------------------------------

Relation Relation::unary(int size, std::vector<Element> members) {
  Relation r;
  r.arity_ = 1;
  r.size_ = size;
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  r.bitmap_.assign(static_cast<std::size_t>(size) + 1, 0);
  for (Element e : members) {
    if (e < 1 || e > size) throw StructureError("element " + std::to_string(e) + " out of range");
    r.bitmap_[static_cast<std::size_t>(e)] = 1;
  }
  r.members_ = std::move(members);
  return r;
}

Relation Relation::natural_order(int size) {
  Relation r;
  r.arity_ = 2;
  r.size_ = size;
  r.natural_ = true;
  return r;
}

Relation Relation::binary(int size, std::vector<ElementPair> tuples) {
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  for (const auto& [a, b] : tuples)
    if (a < 1 || a > size || b < 1 || b > size)
      throw StructureError("tuple (" + std::to_string(a) + "," + std::to_string(b) + ") out of range");

  const auto n = static_cast<std::size_t>(size);
  if (size > 0 && tuples.size() == n * (n + 1) / 2 &&
      std::all_of(tuples.begin(), tuples.end(), [](const ElementPair& p) { return p.first <= p.second; }))
    return natural_order(size);

  Relation r;
  r.arity_ = 2;
  r.size_ = size;
  r.out_offsets_.assign(n + 2, 0);
  r.in_offsets_.assign(n + 2, 0);
  for (const auto& [a, b] : tuples) {
    ++r.out_offsets_[static_cast<std::size_t>(a) + 1];
    ++r.in_offsets_[static_cast<std::size_t>(b) + 1];
  }
  for (std::size_t i = 1; i < n + 2; ++i) {
    r.out_offsets_[i] += r.out_offsets_[i - 1];
    r.in_offsets_[i] += r.in_offsets_[i - 1];
  }
  r.out_.resize(tuples.size());
  r.in_.resize(tuples.size());
  std::vector<std::size_t> out_fill(r.out_offsets_.begin(), r.out_offsets_.end() - 1);
  std::vector<std::size_t> in_fill(r.in_offsets_.begin(), r.in_offsets_.end() - 1);
  // Tuples are sorted by (a, b), so successor lists come out sorted; predecessor
  // lists are filled in increasing a for each b and are sorted as well.
  for (const auto& [a, b] : tuples) {
    r.out_[out_fill[static_cast<std::size_t>(a)]++] = b;
    r.in_[in_fill[static_cast<std::size_t>(b)]++] = a;
    if (a == b) r.loops_.push_back(a);
  }
  for (Element e = 1; e <= size; ++e) {
    if (!r.successors(e).empty()) r.sources_.push_back(e);
    if (!r.predecessors(e).empty()) r.targets_.push_back(e);
  }
  return r;
}

bool Relation::contains(Element a) const {
  if (arity_ != 1) throw VocabularyError("unary lookup on a binary relation");
  return a >= 1 && a <= size_ && bitmap_[static_cast<std::size_t>(a)];
}

bool Relation::contains(Element a, Element b) const {
  if (arity_ != 2) throw VocabularyError("binary lookup on a unary relation");
  if (a < 1 || a > size_ || b < 1 || b > size_) return false;
  if (natural_) return a <= b;
  auto succ = successors(a);
  return std::binary_search(succ.begin(), succ.end(), b);
}

std::size_t Relation::cardinality() const noexcept {
  if (arity_ == 1) return members_.size();
  if (natural_) {
    const auto n = static_cast<std::size_t>(size_);
    return n * (n + 1) / 2;
  }
  return out_.size();
}

std::span<const Element> Relation::successors(Element a) const {
  if (natural_ || arity_ != 2) throw StructureError("successor lists are only kept for explicit binary tables");
  if (a < 1 || a > size_) return {};
  const auto i = static_cast<std::size_t>(a);
  return {out_.data() + out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]};
}

std::span<const Element> Relation::predecessors(Element b) const {
  if (natural_ || arity_ != 2) throw StructureError("predecessor lists are only kept for explicit binary tables");
  if (b < 1 || b > size_) return {};
  const auto i = static_cast<std::size_t>(b);
  return {in_.data() + in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]};
}

std::vector<ElementPair> Relation::pairs() const {
  std::vector<ElementPair> out;
  if (arity_ != 2) return out;
  out.reserve(cardinality());
  for (Element a = 1; a <= size_; ++a) {
    if (natural_) {
      for (Element b = a; b <= size_; ++b) out.emplace_back(a, b);
    } else {
      for (Element b : successors(a)) out.emplace_back(a, b);
    }
  }
  return out;
}

bool Relation::operator==(const Relation& other) const {
  if (arity_ != other.arity_ || size_ != other.size_) return false;
  if (arity_ == 1) return members_ == other.members_;
  if (natural_ || other.natural_) return natural_ == other.natural_;
  return out_offsets_ == other.out_offsets_ && out_ == other.out_;
}

// ---------------------------------------------------------------------------

Structure::Structure(Vocabulary vocab, int size, std::vector<Relation> tables, std::vector<Element> constants)
    : vocab_(std::move(vocab)), size_(size), constants_(std::move(constants)) {
  if (size < 1) throw StructureError("structures must have at least one element");
  if (tables.size() != vocab_.relations().size())
    throw StructureError("table count does not match the vocabulary");
  if (constants_.size() != vocab_.constants().size())
    throw StructureError("constant count does not match the vocabulary");
  tables_.reserve(tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].arity() != vocab_.relations()[i].arity || tables[i].universe_size() != size)
      throw StructureError("table for '" + vocab_.relations()[i].name + "' has the wrong shape");
    tables_.push_back(std::make_shared<const Relation>(std::move(tables[i])));
  }
  for (Element c : constants_)
    if (c < 1 || c > size_) throw StructureError("constant value " + std::to_string(c) + " out of range");
}

const Relation& Structure::relation(std::string_view name) const {
  auto idx = vocab_.relation_index(name);
  if (!idx) throw VocabularyError("structure has no relation '" + std::string(name) + "'");
  return *tables_[*idx];
}

Element Structure::constant(std::string_view name) const {
  auto idx = vocab_.constant_index(name);
  if (!idx) throw VocabularyError("structure has no constant '" + std::string(name) + "'");
  return constants_[*idx];
}

bool Structure::operator==(const Structure& other) const {
  if (!(vocab_ == other.vocab_) || size_ != other.size_ || constants_ != other.constants_) return false;
  for (std::size_t i = 0; i < tables_.size(); ++i)
    if (tables_[i] != other.tables_[i] && !(*tables_[i] == *other.tables_[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------

StructureBuilder::StructureBuilder(Vocabulary vocab, int size)
    : vocab_(std::move(vocab)),
      size_(size),
      unary_(vocab_.relations().size()),
      binary_(vocab_.relations().size()),
      natural_(vocab_.relations().size(), 0),
      constants_(vocab_.constants().size()) {
  if (size < 1) throw StructureError("structures must have at least one element");
}

std::size_t StructureBuilder::index_of(std::string_view relation, int arity) const {
  auto idx = vocab_.relation_index(relation);
  if (!idx) throw VocabularyError("unknown relation '" + std::string(relation) + "'");
  if (vocab_.relations()[*idx].arity != arity)
    throw VocabularyError("relation '" + std::string(relation) + "' has arity " +
                          std::to_string(vocab_.relations()[*idx].arity));
  return *idx;
}

void StructureBuilder::check_element(Element e) const {
  if (e < 1 || e > size_)
    throw StructureError("element " + std::to_string(e) + " outside 1.." + std::to_string(size_));
}

StructureBuilder& StructureBuilder::add(std::string_view relation, Element a) {
  check_element(a);
  unary_[index_of(relation, 1)].push_back(a);
  return *this;
}

StructureBuilder& StructureBuilder::add(std::string_view relation, Element a, Element b) {
  check_element(a);
  check_element(b);
  const auto idx = index_of(relation, 2);
  if (!natural_[idx] || a > b) {
    if (natural_[idx]) {
      // Leaving the implicit order: materialize it first.
      natural_[idx] = 0;
      for (Element i = 1; i <= size_; ++i)
        for (Element j = i; j <= size_; ++j) binary_[idx].emplace_back(i, j);
    }
    binary_[idx].emplace_back(a, b);
  }
  return *this;
}

StructureBuilder& StructureBuilder::set_natural_order(std::string_view relation) {
  const auto idx = index_of(relation, 2);
  natural_[idx] = 1;
  binary_[idx].clear();
  return *this;
}

StructureBuilder& StructureBuilder::set_constant(std::string_view name, Element value) {
  auto idx = vocab_.constant_index(name);
  if (!idx) throw VocabularyError("unknown constant '" + std::string(name) + "'");
  check_element(value);
  constants_[*idx] = value;
  return *this;
}

Structure StructureBuilder::build() const {
  std::vector<Relation> tables;
  tables.reserve(vocab_.relations().size());
  for (std::size_t i = 0; i < vocab_.relations().size(); ++i) {
    if (vocab_.relations()[i].arity == 1)
      tables.push_back(Relation::unary(size_, unary_[i]));
    else if (natural_[i])
      tables.push_back(Relation::natural_order(size_));
    else
      tables.push_back(Relation::binary(size_, binary_[i]));
  }
  std::vector<Element> consts;
  for (std::size_t i = 0; i < constants_.size(); ++i) {
    if (!constants_[i]) throw StructureError("constant '" + vocab_.constants()[i] + "' was never assigned");
    consts.push_back(*constants_[i]);
  }
  return Structure(vocab_, size_, std::move(tables), std::move(consts));
}

}  // namespace extclosed
