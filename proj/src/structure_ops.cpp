#include "extclosed/structure_ops.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <numeric>
#include <sstream>

#include "extclosed/errors.hpp"

namespace extclosed {

namespace {

const Relation& order_relation(const Structure& a) {
  auto idx = a.vocab().relation_index(kOrderSymbol);
  if (!idx || a.vocab().relations()[*idx].arity != 2)
    throw VocabularyError("vocabulary has no binary '<=' symbol");
  return a.relation(*idx);
}

// Copy `a` onto a new universe. old_to_new[e] is the new label of e, or 0 when
// e is dropped. `monotone` promises that kept elements keep their index order,
// which lets an implicit natural order stay implicit.
Structure relabel(const Structure& a, const std::vector<Element>& old_to_new, int new_size, bool monotone) {
  const auto& vocab = a.vocab();
  std::vector<Relation> tables;
  for (std::size_t r = 0; r < vocab.relations().size(); ++r) {
    const Relation& rel = a.relation(r);
    if (rel.arity() == 1) {
      std::vector<Element> members;
      for (Element e : rel.members())
        if (old_to_new[e]) members.push_back(old_to_new[e]);
      tables.push_back(Relation::unary(new_size, std::move(members)));
    } else if (rel.is_natural_order() && monotone) {
      tables.push_back(Relation::natural_order(new_size));
    } else {
      std::vector<ElementPair> tuples;
      if (rel.is_natural_order()) {
        for (Element x = 1; x <= a.size(); ++x)
          for (Element y = x; y <= a.size(); ++y)
            if (old_to_new[x] && old_to_new[y]) tuples.emplace_back(old_to_new[x], old_to_new[y]);
      } else {
        for (Element x : rel.sources()) {
          if (!old_to_new[x]) continue;
          for (Element y : rel.successors(x))
            if (old_to_new[y]) tuples.emplace_back(old_to_new[x], old_to_new[y]);
        }
      }
      tables.push_back(Relation::binary(new_size, std::move(tuples)));
    }
  }
  std::vector<Element> consts;
  for (std::size_t c = 0; c < a.constants().size(); ++c) {
    Element mapped = old_to_new[a.constants()[c]];
    if (!mapped) throw StructureError("constant '" + vocab.constants()[c] + "' falls outside the substructure");
    consts.push_back(mapped);
  }
  return Structure(vocab, new_size, std::move(tables), std::move(consts));
}

void require_no_constants(const Structure& a, const char* op) {
  if (!a.vocab().constants().empty())
    throw VocabularyError(std::string(op) + " is only defined for vocabularies without constants");
}

}  // namespace

bool check_ordered(const Structure& a) {
  const Relation& le = order_relation(a);
  if (le.is_natural_order()) return true;
  const auto n = static_cast<std::size_t>(a.size());
  if (le.cardinality() != n * (n + 1) / 2) return false;
  // In a linear order the element of rank r has exactly n - r + 1 upper bounds.
  std::vector<int> rank(n + 1, 0);
  std::vector<char> used(n + 1, 0);
  for (Element e = 1; e <= a.size(); ++e) {
    const auto up = le.successors(e).size();
    if (up < 1 || up > n) return false;
    const std::size_t r = n - up + 1;
    if (used[r]) return false;
    used[r] = 1;
    rank[static_cast<std::size_t>(e)] = static_cast<int>(r);
  }
  for (Element x = 1; x <= a.size(); ++x)
    for (Element y : le.successors(x))
      if (rank[static_cast<std::size_t>(x)] > rank[static_cast<std::size_t>(y)]) return false;
  return true;
}

std::vector<int> order_ranks(const Structure& a) {
  if (!check_ordered(a)) throw StructureError("structure is not ordered by '<='");
  const Relation& le = order_relation(a);
  std::vector<int> rank(static_cast<std::size_t>(a.size()) + 1, 0);
  for (Element e = 1; e <= a.size(); ++e)
    rank[static_cast<std::size_t>(e)] =
        le.is_natural_order() ? e : a.size() - static_cast<int>(le.successors(e).size()) + 1;
  return rank;
}

bool check_partial_successor(const Structure& a) {
  const auto rank = order_ranks(a);
  auto idx = a.vocab().relation_index(kSuccSymbol);
  if (!idx || a.vocab().relations()[*idx].arity != 2) throw VocabularyError("vocabulary has no binary 'S' symbol");
  const Relation& s = a.relation(*idx);
  // A natural-order table contains reflexive pairs, which are never successor pairs.
  if (s.is_natural_order()) return false;
  for (Element x : s.sources())
    for (Element y : s.successors(x))
      if (rank[static_cast<std::size_t>(y)] != rank[static_cast<std::size_t>(x)] + 1) return false;
  return true;
}

Structure normalize_order(const Structure& a) {
  if (order_relation(a).is_natural_order()) return a;
  auto rank = order_ranks(a);
  return relabel(a, rank, a.size(), false);
}

Structure ordered_sum(const Structure& a, const Structure& b) {
  const Structure parts[] = {a, b};
  return ordered_sum_seq(parts);
}

Structure ordered_sum_seq(std::span<const Structure> items) {
  if (items.empty()) throw StructureError("ordered sum of an empty sequence");
  const Vocabulary& vocab = items.front().vocab();
  for (const auto& item : items) {
    if (!(item.vocab() == vocab)) throw VocabularyError("ordered sum of structures over different vocabularies");
    require_no_constants(item, "ordered sum");
  }
  if (items.size() == 1) return normalize_order(items.front());

  std::vector<Structure> normalized;
  normalized.reserve(items.size());
  long long total = 1;
  for (const auto& item : items) {
    normalized.push_back(normalize_order(item));
    total += item.size() - 1;
  }
  if (total > 2'000'000'000LL) throw StructureError("ordered sum exceeds the supported universe size");
  const int size = static_cast<int>(total);

  std::vector<Relation> tables;
  for (std::size_t r = 0; r < vocab.relations().size(); ++r) {
    if (vocab.relations()[r].name == kOrderSymbol && vocab.relations()[r].arity == 2) {
      tables.push_back(Relation::natural_order(size));
      continue;
    }
    std::vector<Element> members;
    std::vector<ElementPair> tuples;
    Element offset = 0;
    for (const auto& part : normalized) {
      const Relation& rel = part.relation(r);
      if (rel.arity() == 1) {
        for (Element e : rel.members()) members.push_back(e + offset);
      } else {
        for (const auto& [x, y] : rel.pairs()) tuples.emplace_back(x + offset, y + offset);
      }
      offset += part.size() - 1;
    }
    tables.push_back(vocab.relations()[r].arity == 1 ? Relation::unary(size, std::move(members))
                                                     : Relation::binary(size, std::move(tuples)));
  }
  return Structure(vocab, size, std::move(tables), {});
}

Structure star_expand(const Structure& a) {
  const auto rank = order_ranks(a);
  Element lo = 1, hi = 1;
  for (Element e = 1; e <= a.size(); ++e) {
    if (rank[static_cast<std::size_t>(e)] == 1) lo = e;
    if (rank[static_cast<std::size_t>(e)] == a.size()) hi = e;
  }
  const Vocabulary vocab = a.vocab().with_constant("min").with_constant("max");
  std::vector<Relation> tables;
  for (std::size_t r = 0; r < a.vocab().relations().size(); ++r) tables.push_back(a.relation(r));
  auto consts = a.constants();
  consts.push_back(lo);
  consts.push_back(hi);
  return Structure(vocab, a.size(), std::move(tables), std::move(consts));
}

Structure minmax_expand(const Structure& a, const std::optional<std::string>& unary,
                        const std::optional<std::string>& binary) {
  const auto rank = order_ranks(a);
  Element lo = 1, hi = 1;
  for (Element e = 1; e <= a.size(); ++e) {
    if (rank[static_cast<std::size_t>(e)] == 1) lo = e;
    if (rank[static_cast<std::size_t>(e)] == a.size()) hi = e;
  }
  Vocabulary vocab = a.vocab();
  auto ensure = [&](const std::string& name, int arity) {
    auto idx = vocab.relation_index(name);
    if (!idx) {
      vocab = vocab.with_relation({name, arity});
    } else if (vocab.relations()[*idx].arity != arity) {
      throw VocabularyError("symbol '" + name + "' already has arity " +
                            std::to_string(vocab.relations()[*idx].arity));
    }
  };
  if (unary) ensure(*unary, 1);
  if (binary) ensure(*binary, 2);

  std::vector<Relation> tables;
  for (std::size_t r = 0; r < vocab.relations().size(); ++r) {
    const auto& sym = vocab.relations()[r];
    const bool existing = r < a.vocab().relations().size();
    if (unary && sym.name == *unary) {
      std::vector<Element> members = existing ? a.relation(r).members() : std::vector<Element>{};
      members.push_back(lo);
      members.push_back(hi);
      tables.push_back(Relation::unary(a.size(), std::move(members)));
    } else if (binary && sym.name == *binary) {
      std::vector<ElementPair> tuples = existing ? a.relation(r).pairs() : std::vector<ElementPair>{};
      tuples.emplace_back(lo, hi);
      tables.push_back(Relation::binary(a.size(), std::move(tuples)));
    } else {
      tables.push_back(a.relation(r));
    }
  }
  return Structure(vocab, a.size(), std::move(tables), a.constants());
}

bool is_partial_isomorphism(const Structure& a, const Structure& b, const PartialMap& map, bool respect_constants) {
  if (!(a.vocab() == b.vocab())) throw VocabularyError("partial isomorphism between different vocabularies");
  PartialMap pairs = map;
  if (respect_constants)
    for (std::size_t c = 0; c < a.constants().size(); ++c) pairs.emplace_back(a.constants()[c], b.constants()[c]);
  for (const auto& [x, y] : pairs)
    if (x < 1 || x > a.size() || y < 1 || y > b.size()) throw StructureError("partial map index out of range");

  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t j = i + 1; j < pairs.size(); ++j)
      if ((pairs[i].first == pairs[j].first) != (pairs[i].second == pairs[j].second)) return false;

  for (std::size_t r = 0; r < a.vocab().relations().size(); ++r) {
    const Relation& ra = a.relation(r);
    const Relation& rb = b.relation(r);
    for (const auto& [x, y] : pairs) {
      if (ra.arity() == 1) {
        if (ra.contains(x) != rb.contains(y)) return false;
        continue;
      }
      for (const auto& [x2, y2] : pairs)
        if (ra.contains(x, x2) != rb.contains(y, y2)) return false;
    }
  }
  return true;
}

Structure induced_substructure(const Structure& a, Element lo, Element hi) {
  const auto rank = order_ranks(a);
  if (lo < 1 || lo > a.size() || hi < 1 || hi > a.size()) throw StructureError("interval endpoint out of range");
  const int rlo = rank[static_cast<std::size_t>(lo)];
  const int rhi = rank[static_cast<std::size_t>(hi)];
  if (rlo > rhi) throw StructureError("interval is empty: lo is above hi in the order");
  std::vector<Element> old_to_new(static_cast<std::size_t>(a.size()) + 1, 0);
  for (Element e = 1; e <= a.size(); ++e) {
    const int r = rank[static_cast<std::size_t>(e)];
    if (r >= rlo && r <= rhi) old_to_new[static_cast<std::size_t>(e)] = r - rlo + 1;
  }
  const bool natural = order_relation(a).is_natural_order();
  return relabel(a, old_to_new, rhi - rlo + 1, natural);
}

Structure substructure(const Structure& a, std::vector<Element> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  if (elements.empty()) throw StructureError("substructure on an empty set");
  std::vector<Element> old_to_new(static_cast<std::size_t>(a.size()) + 1, 0);
  Element next = 0;
  for (Element e : elements) {
    if (e < 1 || e > a.size()) throw StructureError("element " + std::to_string(e) + " out of range");
    old_to_new[static_cast<std::size_t>(e)] = ++next;
  }
  return relabel(a, old_to_new, next, true);
}

Structure reduct(const Structure& a, const Vocabulary& vocab) {
  if (!vocab.is_subset_of(a.vocab())) throw VocabularyError("reduct vocabulary is not a subset");
  std::vector<Relation> tables;
  for (const auto& sym : vocab.relations()) tables.push_back(a.relation(sym.name));
  std::vector<Element> consts;
  for (const auto& c : vocab.constants()) consts.push_back(a.constant(c));
  return Structure(vocab, a.size(), std::move(tables), std::move(consts));
}

Structure expand_vocabulary(const Structure& a, const Vocabulary& vocab) {
  if (!a.vocab().is_subset_of(vocab)) throw VocabularyError("target vocabulary does not contain the source");
  std::vector<Relation> tables;
  for (const auto& sym : vocab.relations()) {
    if (a.vocab().has_relation(sym.name))
      tables.push_back(a.relation(sym.name));
    else
      tables.push_back(sym.arity == 1 ? Relation::unary(a.size(), {}) : Relation::binary(a.size(), {}));
  }
  std::vector<Element> consts;
  for (const auto& c : vocab.constants()) {
    if (!a.vocab().has_constant(c)) throw VocabularyError("cannot invent a value for constant '" + c + "'");
    consts.push_back(a.constant(c));
  }
  return Structure(vocab, a.size(), std::move(tables), std::move(consts));
}

// ---------------------------------------------------------------------------

namespace {

bool mapping_is_isomorphism(const Structure& a, const Structure& b, const std::vector<Element>& f) {
  for (std::size_t r = 0; r < a.vocab().relations().size(); ++r) {
    const Relation& ra = a.relation(r);
    const Relation& rb = b.relation(r);
    if (ra.cardinality() != rb.cardinality()) return false;
    if (ra.arity() == 1) {
      for (Element e : ra.members())
        if (!rb.contains(f[static_cast<std::size_t>(e)])) return false;
    } else if (ra.is_natural_order()) {
      for (Element x = 1; x <= a.size(); ++x)
        for (Element y = x; y <= a.size(); ++y)
          if (!rb.contains(f[static_cast<std::size_t>(x)], f[static_cast<std::size_t>(y)])) return false;
    } else {
      for (Element x : ra.sources())
        for (Element y : ra.successors(x))
          if (!rb.contains(f[static_cast<std::size_t>(x)], f[static_cast<std::size_t>(y)])) return false;
    }
  }
  for (std::size_t c = 0; c < a.constants().size(); ++c)
    if (f[static_cast<std::size_t>(a.constants()[c])] != b.constants()[c]) return false;
  return true;
}

}  // namespace

std::optional<std::vector<Element>> find_isomorphism(const Structure& a, const Structure& b) {
  if (!(a.vocab() == b.vocab()) || a.size() != b.size()) return std::nullopt;
  const auto n = static_cast<std::size_t>(a.size());

  const bool has_order = a.vocab().has_relation(kOrderSymbol) && a.vocab().arity(kOrderSymbol) == 2;
  if (has_order && check_ordered(a)) {
    if (!check_ordered(b)) return std::nullopt;
    // The only candidate is the order-preserving bijection.
    const auto ra = order_ranks(a);
    const auto rb = order_ranks(b);
    std::vector<Element> by_rank(n + 1, 0);
    for (Element e = 1; e <= b.size(); ++e) by_rank[static_cast<std::size_t>(rb[static_cast<std::size_t>(e)])] = e;
    std::vector<Element> f(n + 1, 0);
    for (Element e = 1; e <= a.size(); ++e)
      f[static_cast<std::size_t>(e)] = by_rank[static_cast<std::size_t>(ra[static_cast<std::size_t>(e)])];
    if (mapping_is_isomorphism(a, b, f)) return f;
    return std::nullopt;
  }

  // Backtracking with incremental partial-isomorphism checks.
  std::vector<Element> f(n + 1, 0);
  std::vector<char> used(n + 1, 0);
  PartialMap partial;
  std::function<bool(Element)> extend = [&](Element x) -> bool {
    if (x > a.size()) return mapping_is_isomorphism(a, b, f);
    for (Element y = 1; y <= b.size(); ++y) {
      if (used[static_cast<std::size_t>(y)]) continue;
      partial.emplace_back(x, y);
      if (is_partial_isomorphism(a, b, partial, true)) {
        f[static_cast<std::size_t>(x)] = y;
        used[static_cast<std::size_t>(y)] = 1;
        if (extend(x + 1)) return true;
        used[static_cast<std::size_t>(y)] = 0;
      }
      partial.pop_back();
    }
    return false;
  };
  if (extend(1)) return f;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::string serialize(const Structure& a, SerializeOptions options) {
  std::ostringstream out;
  const auto& vocab = a.vocab();
  for (const auto& r : vocab.relations()) out << "vocab rel " << r.name << ' ' << r.arity << '\n';
  for (const auto& c : vocab.constants()) out << "vocab const " << c << '\n';
  out << "size " << a.size() << '\n';
  for (std::size_t r = 0; r < vocab.relations().size(); ++r) {
    const Relation& rel = a.relation(r);
    const auto& name = vocab.relations()[r].name;
    if (rel.arity() == 1) {
      for (Element e : rel.members()) out << "rel " << name << ' ' << e << '\n';
    } else if (rel.is_natural_order() && options.compact_order) {
      out << "order " << name << '\n';
    } else {
      for (const auto& [x, y] : rel.pairs()) out << "rel " << name << ' ' << x << ' ' << y << '\n';
    }
  }
  for (std::size_t c = 0; c < vocab.constants().size(); ++c)
    out << "const " << vocab.constants()[c] << ' ' << a.constants()[c] << '\n';
  return out.str();
}

namespace {

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) words.push_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

int parse_int(std::string_view word, std::size_t line) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size())
    throw ParseError(line, "expected an integer, got '" + std::string(word) + "'");
  return value;
}

}  // namespace

Structure parse_structure(std::string_view text) {
  std::vector<RelationSymbol> relations;
  std::vector<std::string> constants;
  std::optional<StructureBuilder> builder;
  std::size_t line_no = 0;

  auto require_builder = [&]() -> StructureBuilder& {
    if (!builder) throw ParseError(line_no, "'size' must precede tuples and constants");
    return *builder;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto words = split_words(line);
    if (words.empty()) continue;

    try {
      const auto& kw = words[0];
      if (kw == "vocab") {
        if (builder) throw ParseError(line_no, "vocabulary lines must precede 'size'");
        if (words.size() == 4 && words[1] == "rel")
          relations.push_back({std::string(words[2]), parse_int(words[3], line_no)});
        else if (words.size() == 3 && words[1] == "const")
          constants.emplace_back(words[2]);
        else
          throw ParseError(line_no, "expected 'vocab rel <name> <arity>' or 'vocab const <name>'");
      } else if (kw == "size") {
        if (builder) throw ParseError(line_no, "duplicate 'size' line");
        if (words.size() != 2) throw ParseError(line_no, "expected 'size <N>'");
        builder.emplace(Vocabulary(relations, constants), parse_int(words[1], line_no));
      } else if (kw == "rel") {
        auto& b = require_builder();
        if (words.size() == 3)
          b.add(words[1], parse_int(words[2], line_no));
        else if (words.size() == 4)
          b.add(words[1], parse_int(words[2], line_no), parse_int(words[3], line_no));
        else
          throw ParseError(line_no, "expected 'rel <name> <i1> [<i2>]'");
      } else if (kw == "order") {
        if (words.size() != 2) throw ParseError(line_no, "expected 'order <name>'");
        require_builder().set_natural_order(words[1]);
      } else if (kw == "const") {
        if (words.size() != 3) throw ParseError(line_no, "expected 'const <name> <i>'");
        require_builder().set_constant(words[1], parse_int(words[2], line_no));
      } else {
        throw ParseError(line_no, "unknown directive '" + std::string(kw) + "'");
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!builder) throw ParseError(0, "missing 'size' line");
  try {
    return builder->build();
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

}  // namespace extclosed
