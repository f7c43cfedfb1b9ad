#pragma once

#include <string>
#include <vector>

#include "extclosed/constructions.hpp"
#include "extclosed/random.hpp"
#include "extclosed/structure.hpp"
#include "extclosed/structure_ops.hpp"

namespace testing {

using namespace extclosed;

// L_m with extra tuples added on top.
inline Structure with_tuples(const Structure& base, const std::string& rel, std::vector<ElementPair> extra) {
  StructureBuilder b(base.vocab(), base.size());
  for (std::size_t r = 0; r < base.vocab().relations().size(); ++r) {
    const auto& sym = base.vocab().relations()[r];
    if (sym.arity == 1) {
      for (Element e : base.relation(r).members()) b.add(sym.name, e);
    } else {
      for (const auto& [x, y] : base.relation(r).pairs()) b.add(sym.name, x, y);
    }
  }
  for (const auto& [x, y] : extra) b.add(rel, x, y);
  for (const auto& c : base.vocab().constants()) b.set_constant(c, base.constant(c));
  return b.build();
}

inline Vocabulary ordered_vocab() { return Vocabulary({{"<=", 2}, {"S", 2}, {"R", 2}, {"U", 1}}); }

inline Structure small_ordered(Rng& rng, int max_size, double density = 0.3) {
  RandomStructureOptions o;
  o.max_size = max_size;
  o.density = density;
  o.partial_successor = true;
  return random_structure(ordered_vocab(), rng, o);
}

}  // namespace testing
