#include "extclosed/random.hpp"

#include <algorithm>

#include "extclosed/constructions.hpp"
#include "extclosed/errors.hpp"
#include "extclosed/structure_ops.hpp"

namespace extclosed {

namespace {

bool coin(Rng& rng, double p) { return std::bernoulli_distribution(std::clamp(p, 0.0, 1.0))(rng); }

Element uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

Structure random_structure(const Vocabulary& vocab, Rng& rng, const RandomStructureOptions& options) {
  if (options.min_size < 1 || options.max_size < options.min_size)
    throw Error("random_structure: invalid size range");
  const int n = uniform(rng, options.min_size, options.max_size);
  StructureBuilder b(vocab, n);
  for (const auto& rel : vocab.relations()) {
    if (rel.name == kOrderSymbol && rel.arity == 2) {
      b.set_natural_order(rel.name);
      continue;
    }
    if (rel.name == kSuccSymbol && rel.arity == 2 && options.partial_successor) {
      for (Element i = 1; i < n; ++i)
        if (coin(rng, options.successor_density)) b.add(rel.name, i, i + 1);
      continue;
    }
    if (rel.arity == 1) {
      for (Element i = 1; i <= n; ++i)
        if (coin(rng, options.density)) b.add(rel.name, i);
    } else {
      for (Element i = 1; i <= n; ++i)
        for (Element j = 1; j <= n; ++j)
          if (coin(rng, options.density)) b.add(rel.name, i, j);
    }
  }
  for (const auto& c : vocab.constants()) b.set_constant(c, uniform(rng, 1, n));
  return b.build();
}

Extension random_extension(const Structure& A, Rng& rng, const RandomExtensionOptions& options) {
  const int old_size = A.size();
  const int added = uniform(rng, 1, std::max(1, options.max_new_elements));
  const int size = old_size + added;

  // Choose which positions of the new order hold the new elements.
  std::vector<char> is_new(static_cast<std::size_t>(size) + 1, 0);
  std::vector<Element> positions(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) positions[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(positions.begin(), positions.end(), rng);
  std::vector<Element> fresh(positions.begin(), positions.begin() + added);
  std::sort(fresh.begin(), fresh.end());
  for (Element e : fresh) is_new[static_cast<std::size_t>(e)] = 1;

  std::vector<Element> embedding(static_cast<std::size_t>(old_size) + 1, 0);
  {
    Element next = 1;
    for (Element e = 1; e <= size; ++e)
      if (!is_new[static_cast<std::size_t>(e)]) embedding[static_cast<std::size_t>(next++)] = e;
  }
  auto map = [&](Element a) { return embedding[static_cast<std::size_t>(a)]; };

  StructureBuilder b(A.vocab(), size);
  const auto& rels = A.vocab().relations();
  std::poisson_distribution<int> how_many(std::max(1e-9, options.tuples_per_relation));
  for (std::size_t r = 0; r < rels.size(); ++r) {
    const Relation& table = A.relation(r);
    if (rels[r].arity == 2 && table.is_natural_order()) {
      b.set_natural_order(rels[r].name);
      continue;
    }
    if (rels[r].arity == 1) {
      for (Element a : table.members()) b.add(rels[r].name, map(a));
    } else {
      for (const auto& [x, y] : table.pairs()) b.add(rels[r].name, map(x), map(y));
    }
    const int extra = how_many(rng);
    for (int t = 0; t < extra; ++t) {
      Element fresh_elem = fresh[static_cast<std::size_t>(uniform(rng, 0, added - 1))];
      if (rels[r].arity == 1) {
        b.add(rels[r].name, fresh_elem);
      } else {
        Element other = uniform(rng, 1, size);
        if (coin(rng, 0.5))
          b.add(rels[r].name, fresh_elem, other);
        else
          b.add(rels[r].name, other, fresh_elem);
      }
    }
  }
  for (const auto& c : A.vocab().constants()) b.set_constant(c, map(A.constant(c)));
  return Extension{b.build(), std::move(embedding)};
}

Structure random_layered_structure(Rng& rng, int max_size) {
  if (max_size < 2) throw Error("random_layered_structure: max_size must be at least 2");
  const int n = uniform(rng, 2, max_size);
  StructureBuilder b(sigma(2), n);
  b.set_natural_order(kOrderSymbol);
  for (Element i = 1; i < n; ++i)
    if (coin(rng, 0.9)) b.add("S", i, i + 1);
  for (Element i = 1; i <= n; ++i)
    for (Element j = i + 1; j <= n; ++j)
      if (coin(rng, 0.03)) b.add("R", i, j);
  std::vector<Element> points;
  for (Element i = 1; i <= n; ++i)
    if (coin(rng, 0.35)) {
      points.push_back(i);
      b.add("P2", i);
    }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (coin(rng, 0.9)) b.add("S2", points[i], points[i + 1]);
    if (i + 2 < points.size() && coin(rng, 0.1)) b.add("S2", points[i], points[i + 2]);
    if (coin(rng, 0.7)) {
      Element x = uniform(rng, points[i], points[i + 1]);
      Element y = uniform(rng, points[i], points[i + 1]);
      if (x > y) std::swap(x, y);
      if (x < y) b.add("R", x, y);
    }
  }
  for (Element x : points)
    for (Element y : points)
      if (x < y && coin(rng, 0.12)) b.add("R2", x, y);
  return b.build();
}

std::pair<Structure, Structure> random_game_pair(const Vocabulary& vocab, Rng& rng, int max_size) {
  RandomStructureOptions options;
  options.max_size = max_size;
  options.partial_successor = true;
  options.density = 0.25;
  options.successor_density = 0.85;
  Structure a = random_structure(vocab, rng, options);
  switch (uniform(rng, 0, 3)) {
    case 0:
      return {a, random_structure(vocab, rng, options)};
    case 1:
      return {a, a};
    case 2:
      if (a.size() >= 2 && a.size() < max_size) {
        RandomExtensionOptions ext;
        ext.max_new_elements = max_size - a.size();
        ext.tuples_per_relation = 0.5;
        for (int attempt = 0; attempt < 10; ++attempt) {
          auto e = random_extension(a, rng, ext);
          if (e.embedding[1] == 1 && e.embedding[static_cast<std::size_t>(a.size())] == e.structure.size()) {
            if (coin(rng, 0.5)) return {a, std::move(e.structure)};
            return {std::move(e.structure), a};
          }
        }
      }
      return {a, a};
    default: {
      Vocabulary chain({{std::string(kOrderSymbol), 2}, {std::string(kSuccSymbol), 2}});
      if (!chain.is_subset_of(vocab) || !vocab.constants().empty()) return {a, a};
      auto line = [&](int m) { return expand_vocabulary(build_L(m), vocab); };
      const int lo = std::max(1, max_size - 2);
      return {line(uniform(rng, lo, max_size)), line(uniform(rng, lo, max_size))};
    }
  }
}

}  // namespace extclosed
