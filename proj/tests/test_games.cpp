#include "doctest.h"
#include "formula_gen.hpp"
#include "helpers.hpp"

#include "extclosed/errors.hpp"
#include "extclosed/evaluate.hpp"
#include "extclosed/games.hpp"

using namespace extclosed;

namespace {

Vocabulary game_vocab() { return Vocabulary({{"<=", 2}, {"S", 2}, {"U", 1}}); }

Structure order_only(int m) { return reduct(build_L(m), Vocabulary({{"<=", 2}})); }

}  // namespace

TEST_CASE("identity strategy") {
  Rng rng(31);
  for (int t = 0; t < 40; ++t) {
    const Structure a = testing::small_ordered(rng, 5);
    PartialMap id;
    if (t % 2) id.emplace_back(1, 1);
    CHECK(prefix_implies(a, a, GameSpec{1 + t % 3, 1 + t % 2, t % 4 == 0, id}).holds);
    CHECK(prefix_equiv(a, a, GameSpec{2, 1, false, {}}));
  }
}

TEST_CASE("linear orders") {
  CHECK(prefix_implies(build_L(5), build_L(6), GameSpec{1, 1, true, {}}).holds);
  CHECK(prefix_implies(build_L(16), build_L(17), GameSpec{2, 1, true, {}}).holds);
  CHECK(prefix_equiv(build_L(20), build_L(21), GameSpec{2, 1, false, {}}));
  CHECK_FALSE(prefix_equiv(build_L(2), build_L(3), GameSpec{2, 1, false, {}}));
  for (const auto& [a, b] : {std::pair{build_L(2), build_L(3)}, std::pair{build_L(3), build_L(2)}})
    CHECK(naive_game_search(a, b, GameSpec{2, 1, false, {}}).holds ==
          prefix_implies(a, b, GameSpec{2, 1, false, {}}).holds);
  CHECK(rank_equiv(order_only(16), order_only(17), 4));
  CHECK_FALSE(rank_equiv(order_only(14), order_only(15), 4));
  CHECK_FALSE(rank_equiv(order_only(2), order_only(3), 2));
  CHECK(rank_equiv(build_L(2), build_L(5), 0));
  CHECK(naive_game_search(build_L(2), build_L(2), GameSpec{1, 2, false, {}}).holds);
}

TEST_CASE("successor chains above and at rho(1,1)") {
  for (int m1 = 5; m1 <= 8; ++m1)
    for (int m2 = 5; m2 <= 8; ++m2) CHECK(prefix_implies(build_L(m1), build_L(m2), GameSpec{1, 1, true, {}}).holds);
  CHECK_FALSE(prefix_implies(build_L(5), build_L(4), GameSpec{1, 1, true, {}}).holds);
}

TEST_CASE("G4* against L4* and L5*") {
  // The Sigma_{1,1} sentence exists x (min < x < max, !S(min,x), !S(x,max))
  // holds in G4* (x = 2) but not in L4*, so the implication into L4* fails.
  const GameVerdict v = prefix_implies(build_G(4), build_L(4), GameSpec{1, 1, true, {}});
  CHECK_FALSE(v.holds);
  REQUIRE(v.witness);
  CHECK(*v.witness == std::vector<Element>{2});
  CHECK_FALSE(naive_game_search(build_G(4), build_L(4), GameSpec{1, 1, true, {}}).holds);
  CHECK(prefix_implies(build_G(4), build_L(5), GameSpec{1, 1, true, {}}).holds);
  for (int m = 4; m <= 8; ++m) CHECK(prefix_implies(build_G(m), build_L(6), GameSpec{1, 1, true, {}}).holds);
}

TEST_CASE("Tot(1,1) and Gap(1,1)") {
  const ScaleParams p{1, 1, {}};
  const Structure tot = build_Tot(p), gap = build_Gap(p);
  const GameVerdict v = prefix_implies(tot, gap, GameSpec{2, 1, false, {}});
  CHECK(v.holds);
  CHECK_FALSE(v.witness);
  CHECK(prefix_implies(tot, gap, GameSpec{2, 1, false, {}}, GameOptions{100'000'000, 4}).holds);
  const GameVerdict back = prefix_implies(gap, tot, GameSpec{2, 1, false, {}});
  CHECK_FALSE(back.holds);
  REQUIRE(back.witness);
  CHECK(back.witness->size() == 1);
}

TEST_CASE("initial maps") {
  const Structure l = build_L(4);
  const GameVerdict bad = prefix_implies(l, l, GameSpec{1, 1, false, {{1, 2}, {2, 1}}});
  CHECK_FALSE(bad.holds);
  REQUIRE(bad.witness);
  CHECK(bad.witness->empty());
  CHECK(prefix_implies(l, l, GameSpec{2, 1, false, {{2, 2}}}).holds);
  CHECK_FALSE(prefix_implies(l, l, GameSpec{1, 1, false, {{2, 3}}}).holds);
  CHECK_THROWS_AS(prefix_implies(l, l, GameSpec{1, 1, false, {{9, 1}}}), StructureError);
}

TEST_CASE("single elements") {
  StructureBuilder u(game_vocab(), 1), plain(game_vocab(), 1);
  u.set_natural_order("<=").add("U", 1);
  plain.set_natural_order("<=");
  CHECK(prefix_implies(u.build(), u.build(), GameSpec{2, 2, true, {}}).holds);
  CHECK_FALSE(prefix_implies(u.build(), plain.build(), GameSpec{1, 1, false, {}}).holds);
  CHECK_FALSE(naive_game_search(u.build(), plain.build(), GameSpec{1, 2, false, {}}).holds);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(prefix_implies(build_L(3), order_only(3), GameSpec{}), VocabularyError);
  CHECK_THROWS_AS(prefix_implies(build_L(30), build_L(31), GameSpec{3, 2, false, {}}, GameOptions{10, 1}),
                  BudgetExceeded);
  CHECK_THROWS_AS(naive_game_search(build_L(30), build_L(31), GameSpec{3, 2, false, {}}), BudgetExceeded);
  CHECK_THROWS_AS(rank_equiv(order_only(40), order_only(41), 5, GameOptions{10, 1}), BudgetExceeded);
}

TEST_CASE("memoized search agrees with the naive oracle") {
  Rng rng(32);
  for (int t = 0; t < 300; ++t) {
    auto [a, b] = random_game_pair(game_vocab(), rng, 5);
    const GameSpec spec{1 + t % 2, 1 + (t / 2) % 2, t % 3 == 0, {}};
    const GameVerdict fast = prefix_implies(a, b, spec), slow = naive_game_search(a, b, spec);
    CHECK(fast.holds == slow.holds);
    CHECK(fast.witness.has_value() == !fast.holds);
  }
}

TEST_CASE("one round unfolds into the reversed game") {
  Rng rng(33);
  for (int t = 0; t < 60; ++t) {
    auto [a, b] = random_game_pair(game_vocab(), rng, 4);
    const int k = 1 + t % 2;
    bool every = true;
    // Spoiler's k-tuples in A (with repetition), Duplicator's in B.
    std::vector<Element> x(static_cast<std::size_t>(k), 1);
    auto next = [](std::vector<Element>& v, int size) {
      for (std::size_t i = v.size(); i-- > 0;) {
        if (v[i] < size) return ++v[i], true;
        v[i] = 1;
      }
      return false;
    };
    do {
      bool some = false;
      std::vector<Element> y(static_cast<std::size_t>(k), 1);
      do {
        PartialMap back;
        for (std::size_t i = 0; i < x.size(); ++i) back.emplace_back(y[i], x[i]);
        some = prefix_implies(b, a, GameSpec{1, k, false, back}).holds;
      } while (!some && next(y, b.size()));
      every = every && some;
    } while (every && next(x, a.size()));
    CHECK(prefix_implies(a, b, GameSpec{2, k, false, {}}).holds == every);
  }
}

TEST_CASE("monotone in n and k, transitive") {
  Rng rng(34);
  for (int t = 0; t < 150; ++t) {
    auto [a, b] = random_game_pair(game_vocab(), rng, 5);
    const bool starred = t % 2 == 0;
    if (prefix_implies(a, b, GameSpec{2, 2, starred, {}}).holds) {
      CHECK(prefix_implies(a, b, GameSpec{1, 2, starred, {}}).holds);
      CHECK(prefix_implies(a, b, GameSpec{2, 1, starred, {}}).holds);
      CHECK(prefix_implies(a, b, GameSpec{1, 1, starred, {}}).holds);
    }
    auto [c, d] = random_game_pair(game_vocab(), rng, 5);
    (void)d;
    const GameSpec spec{1 + t % 2, 1, false, {}};
    if (prefix_implies(a, b, spec).holds && prefix_implies(b, c, spec).holds) CHECK(prefix_implies(a, c, spec).holds);
  }
}

TEST_CASE("substructures imply their extensions at one round") {
  Rng rng(35);
  for (int t = 0; t < 100; ++t) {
    const Structure a = testing::small_ordered(rng, 4);
    const Structure b = random_extension(a, rng, {2, 1.0}).structure;
    for (int k = 1; k <= 2; ++k) CHECK(prefix_implies(a, b, GameSpec{1, k, false, {}}).holds);
  }
}

TEST_CASE("implication transfers existential sentences") {
  Rng rng(36);
  testing::FormulaGen gen(36);
  int transferred = 0;
  for (int t = 0; t < 150; ++t) {
    auto [a0, b0] = random_game_pair(game_vocab(), rng, 5);
    const Structure a = expand_vocabulary(a0, testing::ordered_vocab());
    const Structure b = expand_vocabulary(b0, testing::ordered_vocab());
    for (int i = 0; i < 6; ++i) {
      const Formula f = to_pnf(gen.existential_sentence(3));
      const PrefixClass c = classify_prefix(f);
      if (c.blocks > 1 || !evaluate(a, f)) continue;
      if (!prefix_implies(a, b, GameSpec{1, std::max(1, c.width), false, {}}).holds) continue;
      ++transferred;
      CHECK_MESSAGE(evaluate(b, f), to_string(f));
    }
  }
  CHECK(transferred > 50);
}

TEST_CASE("sequence sums of L3") {
  auto chain = [](int copies) {
    std::vector<Structure> parts(static_cast<std::size_t>(copies), build_L(3));
    return ordered_sum_seq(parts);
  };
  CHECK(prefix_implies(chain(4), chain(5), GameSpec{1, 1, true, {}}).holds);
  CHECK(prefix_implies(chain(16), chain(15), GameSpec{2, 1, true, {}}).holds);
}

TEST_CASE("composition oracles") {
  const Structure l3 = build_L(3);
  const CompositionCheck same = check_ordered_sum_composition(l3, l3, l3, l3, GameSpec{1, 1, true, {}});
  CHECK(same.hypothesis);
  CHECK(same.conclusion);
  const CompositionCheck vacuous =
      check_ordered_sum_composition(build_L(5), l3, build_L(4), l3, GameSpec{1, 1, true, {}});
  CHECK_FALSE(vacuous.hypothesis);
  CHECK(vacuous.holds());
  const CompositionCheck mm = check_minmax_composition(build_L(5), build_L(6), GameSpec{1, 1, true, {}}, "R", 2);
  CHECK(mm.hypothesis);
  CHECK(mm.conclusion);
  CHECK(check_minmax_composition(l3, l3, GameSpec{2, 1, true, {}}, "U", 1).conclusion);

  Rng rng(37);
  int hypotheses = 0;
  for (int t = 0; t < 100; ++t) {
    auto [a1, b1] = random_game_pair(game_vocab(), rng, 4);
    auto [a2, b2] = random_game_pair(game_vocab(), rng, 4);
    PartialMap p1, p2;
    if (t % 3 == 0) p1.emplace_back(1 + static_cast<Element>(rng() % a1.size()), 1 + static_cast<Element>(rng() % b1.size()));
    const CompositionCheck c = check_ordered_sum_composition(a1, a2, b1, b2, GameSpec{1 + t % 2, 1, true, {}}, p1, p2);
    hypotheses += c.hypothesis;
    CHECK(c.holds());
    auto [a, b] = random_game_pair(game_vocab(), rng, 5);
    CHECK(check_minmax_composition(a, b, GameSpec{1 + t % 2, 1, true, {}}, t % 2 ? "U" : "T", t % 2 ? 1 : 2).holds());
  }
  CHECK(hypotheses > 10);
}

TEST_CASE("threads do not change verdicts or witnesses") {
  Rng rng(38);
  for (int t = 0; t < 40; ++t) {
    auto [a, b] = random_game_pair(game_vocab(), rng, 6);
    const GameSpec spec{2, 1 + t % 2, t % 2 == 0, {}};
    const GameVerdict one = prefix_implies(a, b, spec), four = prefix_implies(a, b, spec, GameOptions{100'000'000, 4});
    CHECK(one.holds == four.holds);
    CHECK(one.witness == four.witness);
  }
}
