#include "doctest.h"
#include "helpers.hpp"

#include "extclosed/errors.hpp"

using namespace extclosed;
using testing::with_tuples;

TEST_CASE("vocabulary rejects clashes and bad arities") {
  CHECK_THROWS_AS(Vocabulary({{"R", 2}, {"R", 1}}), VocabularyError);
  CHECK_THROWS_AS(Vocabulary({{"R", 3}}), VocabularyError);
  CHECK_THROWS_AS(Vocabulary({{"c", 1}}, {"c"}), VocabularyError);
  Vocabulary v({{"<=", 2}, {"U", 1}}, {"c"});
  CHECK(v.arity("U") == 1);
  CHECK(v.has_constant("c"));
  CHECK_THROWS_AS(v.arity("nope"), VocabularyError);
}

TEST_CASE("builder validates indices and constants") {
  StructureBuilder b(Vocabulary({{"R", 2}}, {"c"}), 3);
  CHECK_THROWS_AS(b.add("R", 1, 4), StructureError);
  CHECK_THROWS_AS(b.add("R", 1), VocabularyError);
  b.add("R", 1, 2);
  CHECK_THROWS(b.build());  // constant unset
  b.set_constant("c", 3);
  const Structure s = b.build();
  CHECK(s.relation("R").contains(1, 2));
  CHECK_FALSE(s.relation("R").contains(2, 1));
  CHECK(s.constant("c") == 3);
}

TEST_CASE("check_ordered") {
  CHECK(check_ordered(build_L(3)));
  CHECK_FALSE(check_ordered(with_tuples(build_L(3), "<=", {{2, 1}})));
  StructureBuilder empty(Vocabulary({{"<=", 2}}), 2);
  CHECK_FALSE(check_ordered(empty.build()));
  CHECK_THROWS_AS(check_ordered(StructureBuilder(Vocabulary({{"S", 2}}), 2).build()), VocabularyError);
}

TEST_CASE("check_partial_successor") {
  CHECK(check_partial_successor(build_L(4)));
  CHECK_FALSE(check_partial_successor(with_tuples(build_L(4), "S", {{1, 3}})));
  CHECK(check_partial_successor(build_G(4)));
}

TEST_CASE("ordered sums") {
  CHECK(are_isomorphic(ordered_sum(build_L(3), build_L(3)), build_L(5)));
  CHECK(ordered_sum(build_L(10), build_L(7)).size() == 16);
  const std::vector<Structure> three(3, build_L(2));
  CHECK(are_isomorphic(ordered_sum_seq(three), build_L(4)));
  const std::vector<Structure> one{build_G(5)};
  CHECK(ordered_sum_seq(one) == build_G(5));
  const std::vector<Structure> five(5, build_G(4));
  CHECK(ordered_sum_seq(five).size() == 5 * 4 - 4);
  CHECK_THROWS_AS(ordered_sum_seq(std::span<const Structure>{}), StructureError);
  CHECK_THROWS_AS(ordered_sum(build_L(3), star_expand(build_L(3))), VocabularyError);
}

TEST_CASE("Tot sits on the central R interval of M") {
  const ScaleParams p{1, 1, {}};
  const Structure m = build_M(p);
  const Structure tot = build_Tot(p), gap = build_Gap(p);
  const auto r = m.relation("R").pairs();
  REQUIRE(r.size() == 259);
  const auto [lo, hi] = r[r.size() / 2];
  CHECK(are_isomorphic(induced_substructure(m, lo, hi), tot));
  CHECK(are_isomorphic(induced_substructure(m, r.front().first, r.front().second), gap));
}

TEST_CASE("ordered sum is associative and adds sizes") {
  Rng rng(11);
  for (int t = 0; t < 60; ++t) {
    const Structure a = testing::small_ordered(rng, 3), b = testing::small_ordered(rng, 3),
                    c = testing::small_ordered(rng, 3);
    CHECK(ordered_sum(a, b).size() == a.size() + b.size() - 1);
    CHECK(are_isomorphic(ordered_sum(ordered_sum(a, b), c), ordered_sum(a, ordered_sum(b, c))));
  }
}

TEST_CASE("star and min/max expansions") {
  const Structure l5 = star_expand(build_L(5));
  CHECK(l5.constant("min") == 1);
  CHECK(l5.constant("max") == 5);
  const Structure one = star_expand(build_L(1));
  CHECK(one.constant("min") == one.constant("max"));
  const Structure tot = star_expand(build_Tot(ScaleParams{1, 1, {}}));
  CHECK(tot.relation("R").pairs() == std::vector<ElementPair>{{tot.constant("min"), tot.constant("max")}});

  const Structure e = minmax_expand(build_L(3), "P2", "S2");
  CHECK(e.relation("P2").members() == std::vector<Element>{1, 3});
  CHECK(e.relation("S2").pairs() == std::vector<ElementPair>{{1, 3}});
  const Structure single = minmax_expand(build_L(1), "U", "T");
  CHECK(single.relation("U").members() == std::vector<Element>{1});
  CHECK(single.relation("T").pairs() == std::vector<ElementPair>{{1, 1}});
  CHECK(minmax_expand(e, "P2", "S2") == e);
  CHECK_THROWS_AS(minmax_expand(build_L(3), "S", std::nullopt), VocabularyError);
}

TEST_CASE("partial isomorphisms") {
  const Structure l3 = build_L(3);
  CHECK(is_partial_isomorphism(l3, l3, {}, false));
  CHECK(is_partial_isomorphism(l3, l3, {{1, 1}}, false));
  const Structure s3 = star_expand(l3);
  CHECK_FALSE(is_partial_isomorphism(s3, s3, {{1, 2}}, true));
  CHECK_FALSE(is_partial_isomorphism(l3, l3, {{1, 1}, {2, 1}}, false));
  CHECK_FALSE(is_partial_isomorphism(l3, l3, {{1, 2}, {2, 1}}, false));

  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const Structure a = testing::small_ordered(rng, 4), b = testing::small_ordered(rng, 4);
    PartialMap m, inv;
    const int pairs = static_cast<int>(rng() % 3);
    for (int i = 0; i < pairs; ++i) {
      const Element x = 1 + static_cast<Element>(rng() % a.size()), y = 1 + static_cast<Element>(rng() % b.size());
      m.emplace_back(x, y);
      inv.emplace_back(y, x);
    }
    CHECK(is_partial_isomorphism(a, b, m, false) == is_partial_isomorphism(b, a, inv, false));
  }
}

TEST_CASE("induced substructures") {
  CHECK(are_isomorphic(induced_substructure(build_L(5), 2, 4), build_L(3)));
  const Structure g = build_G(8);
  CHECK(induced_substructure(g, 1, 8) == g);
  CHECK_THROWS_AS(induced_substructure(build_L(5), 4, 2), StructureError);

  const Structure gap = build_Gap(ScaleParams{1, 1, {}});
  const auto r = gap.relation("R").pairs();
  REQUIRE(r.size() == 1);
  CHECK(are_isomorphic(induced_substructure(gap, r[0].first, r[0].second), gap));

  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Structure a = testing::small_ordered(rng, 7);
    const Element lo = 1 + static_cast<Element>(rng() % a.size());
    const Element hi = lo + static_cast<Element>(rng() % (a.size() - lo + 1));
    CHECK(check_ordered(induced_substructure(a, lo, hi)));
  }
}

TEST_CASE("reducts") {
  const ScaleParams p{2, 1, parse_overrides("N_copies=3,tot_copies=3,tot1_len=8")};
  const Structure tot2 = build_Tot(p);
  const Structure low = reduct(tot2, sigma(1));
  CHECK(low.vocab() == sigma(1));
  CHECK_FALSE(low.vocab().has_relation("P2"));
  CHECK(reduct(tot2, tot2.vocab()) == tot2);
  CHECK_THROWS_AS(reduct(build_L(3), sigma(1)), VocabularyError);

  const ScaleParams p1{1, 1, parse_overrides("N_copies=3,tot1_len=8")};
  const Structure m = build_M(p1);
  const Structure plus = minmax_expand(expand_vocabulary(m, sigma(2)), "P2", "S2");
  CHECK(reduct(plus, sigma(1)) == m);
}

TEST_CASE("serialization round trip and errors") {
  for (const Structure& s : {build_L(3), star_expand(build_G(6)), build_Gap(ScaleParams{1, 1, {}})}) {
    CHECK(parse_structure(serialize(s)) == s);
    CHECK(parse_structure(serialize(s, {true})) == s);
    CHECK(serialize(parse_structure(serialize(s))) == serialize(s));
  }
  CHECK_THROWS_AS(parse_structure("vocab rel S 2\nsize 2\nrel S 1 3\n"), ParseError);
  CHECK_THROWS_AS(parse_structure("vocab rel S 2\nsize 2\nrel T 1 2\n"), ParseError);
  try {
    parse_structure("vocab rel S 2\nsize 2\n# comment\nrel S 1 9\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("constructed structures are ordered partial successors") {
  for (const char* o : {"N_copies=3,tot_copies=3,tot1_len=8", "N_copies=5,tot_copies=3,tot1_len=4"})
    for (int n = 1; n <= 3; ++n) {
      const ScaleParams p{n, 1, parse_overrides(o)};
      for (const Structure& s : {build_Tot(p), build_Gap(p), build_M(p), build_N(p)}) {
        CHECK(check_ordered(s));
        CHECK(check_partial_successor(s));
      }
    }
}

TEST_CASE("isomorphism search") {
  CHECK(are_isomorphic(build_L(4), build_L(4)));
  CHECK_FALSE(are_isomorphic(build_L(4), build_G(4)));
  CHECK_FALSE(are_isomorphic(build_L(4), build_L(5)));
}
