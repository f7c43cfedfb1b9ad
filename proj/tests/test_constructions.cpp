#include "doctest.h"
#include "helpers.hpp"

#include "extclosed/datalog.hpp"
#include "extclosed/errors.hpp"
#include "extclosed/evaluate.hpp"

using namespace extclosed;

TEST_CASE("rho") {
  CHECK(rho(1, 1) == 4);
  CHECK(rho(2, 1) == 15);
  CHECK(rho(1, 2) == 6);
  for (int n = 1; n <= 8; ++n)
    for (int k = 1; k <= 8; ++k) {
      Count p = 1;
      for (int i = 0; i < n; ++i) p *= k + 3;
      CHECK(2 * p > rho(n, k));
    }
  CHECK_THROWS(rho(0, 1));
  CHECK(count_to_string(rho(3, 1)) == "48");
}

TEST_CASE("vocabularies") {
  CHECK(sigma(1) == Vocabulary({{"<=", 2}, {"S", 2}, {"R", 2}}));
  CHECK(sigma(2) == Vocabulary({{"<=", 2}, {"S", 2}, {"R", 2}, {"S2", 2}, {"R2", 2}, {"P2", 1}}));
  CHECK(sigma(1).is_subset_of(sigma(3)));
  CHECK(sentence_vocabulary("PhiN", 2).has_constant("a"));
}

TEST_CASE("default multiplicities") {
  const ScaleParams p{1, 1, {}};
  CHECK(p.tot1_len() == 54);
  CHECK(p.n_copies(1) == 4 * 64 + 3);
  CHECK(ScaleParams::default_tot1_len(2) == 96);
  CHECK(ScaleParams::default_tot_copies(2, 1) == 4 * 256 + 3);
  CHECK(ScaleParams::default_n_copies(2, 1) == 4 * 1024 + 3);
}

TEST_CASE("overrides") {
  const auto o = parse_overrides("tot1_len=8, N_copies(1)=5,gap_side=1");
  CHECK(o.at("tot1_len") == 8);
  CHECK(o.at("N_copies(1)") == 5);
  const ScaleParams p{2, 1, o};
  CHECK(p.tot1_len() == 8);
  CHECK(p.n_copies(1) == 5);
  CHECK(p.n_copies(2) == ScaleParams::default_n_copies(2, 1));
  CHECK(p.tot_copies(2) == 3);
  CHECK_THROWS(parse_overrides("bogus=3"));
  CHECK_THROWS(parse_overrides("tot1_len"));
  CHECK_THROWS((ScaleParams{1, 1, {{"tot1_len", 7}}}).validate());
  CHECK_THROWS((ScaleParams{1, 1, {{"tot1_len", 2}}}).validate());
  CHECK_THROWS((ScaleParams{1, 1, {{"N_copies", 4}}}).validate());
  CHECK_THROWS((ScaleParams{1, 1, {{"N_copies", 1}}}).validate());
  CHECK_THROWS((ScaleParams{1, 1, {{"N_copies", 5}, {"M_side", 1}}}).validate());
  CHECK_NOTHROW((ScaleParams{1, 1, {{"N_copies", 3}, {"M_side", 1}}}).validate());
}

TEST_CASE("L and G") {
  CHECK(build_L(3).relation("S").pairs() == std::vector<ElementPair>{{1, 2}, {2, 3}});
  CHECK(build_L(1).size() == 1);
  CHECK(build_G(6).relation("S").pairs() == std::vector<ElementPair>{{1, 2}, {3, 4}, {4, 5}, {5, 6}});
  CHECK_THROWS(build_G(3));
  for (int m = 4; m <= 10; ++m) {
    std::vector<Element> keep;
    for (Element e = 1; e <= m + 1; ++e)
      if (e != (m + 1) / 2) keep.push_back(e);
    CHECK(are_isomorphic(build_G(m), substructure(build_L(m + 1), keep)));
  }
}

TEST_CASE("family sizes at paper scale") {
  const ScaleParams p11{1, 1, {}};
  CHECK(build_Tot(p11).size() == 54);
  CHECK(build_Gap(p11).size() == 54);
  CHECK(build_N(p11).size() == 259 * 53 + 1);
  CHECK(build_N(p11).size() == 13728);
  CHECK(family_sizes(p11, 1).m == 13728);
  CHECK(family_sizes(ScaleParams{1, 2, {}}, 1).n == 47976);
  // Level 2 at paper scale is far beyond the build limit.
  CHECK(family_sizes(ScaleParams{2, 1, {}}, 2).n > kMaxBuildElements);
  CHECK_THROWS_AS(build_N(ScaleParams{2, 1, {}}), StructureError);

  const Structure tot = build_Tot(p11), gap = build_Gap(p11);
  CHECK(tot.relation("R").pairs() == std::vector<ElementPair>{{1, 54}});
  CHECK(tot.relation("S").cardinality() == 53);
  CHECK_FALSE(gap.relation("S").contains(27, 28));
  CHECK(gap.relation("S").cardinality() == 52);
}

TEST_CASE("scaled family sizes follow the ordered-sum law") {
  const ScaleParams p{3, 1, parse_overrides("N_copies=3,tot_copies=3,gap_side=1,M_side=1,tot1_len=8")};
  const int sizes[][4] = {{8, 8, 22, 22}, {64, 64, 190, 190}, {568, 568, 1702, 1702}};
  for (int level = 1; level <= 3; ++level) {
    const FamilySizes f = family_sizes(p, level);
    CHECK(f.tot == sizes[level - 1][0]);
    CHECK(f.gap == sizes[level - 1][1]);
    CHECK(f.n == sizes[level - 1][2]);
    CHECK(f.m == sizes[level - 1][3]);
  }
  CHECK(build_N(p).size() == 1702);
}

TEST_CASE("M has one Tot interval and the rest Gap") {
  const ScaleParams p{1, 1, {{"N_copies(1)", 3}}};
  const Structure m = build_M(p), tot = build_Tot(p), gap = build_Gap(p);
  int tots = 0, gaps = 0;
  for (const auto& [x, y] : m.relation("R").pairs()) {
    const Structure piece = induced_substructure(m, x, y);
    tots += are_isomorphic(piece, tot);
    gaps += are_isomorphic(piece, gap);
  }
  CHECK(tots == 1);
  CHECK(gaps == 2);
}

TEST_CASE("satisfaction holds across scales") {
  const char* profiles[] = {"N_copies=3,tot_copies=3,tot1_len=8", "N_copies=5,tot_copies=3,tot1_len=4",
                            "N_copies=3,tot_copies=5,tot1_len=6"};
  for (const char* o : profiles)
    for (int n = 1; n <= 3; ++n)
      for (int k = 1; k <= 2; ++k) {
        const ScaleParams p{n, k, parse_overrides(o)};
        if (family_sizes(p, n).m > 2000) continue;
        const Formula phi = build_sentence("SomeTotalRN", n);
        const DatalogProgram prog = build_datalog(n);
        const Structure m = build_M(p), nn = build_N(p);
        CHECK(evaluate(m, phi));
        CHECK_FALSE(evaluate(nn, phi));
        CHECK(goal_holds(prog, m));
        CHECK_FALSE(goal_holds(prog, nn));
      }
}

TEST_CASE("phi_n holds on Tot with a, b at the ends") {
  const ScaleParams p{1, 1, parse_overrides("tot1_len=8")};
  const Structure tot = build_Tot(p);
  StructureBuilder b(sentence_vocabulary("PhiN", 1), tot.size());
  b.set_natural_order("<=");
  for (const auto& [x, y] : tot.relation("S").pairs()) b.add("S", x, y);
  for (const auto& [x, y] : tot.relation("R").pairs()) b.add("R", x, y);
  b.set_constant("a", 1).set_constant("b", tot.size());
  CHECK(evaluate(b.build(), build_sentence("PhiN", 1)));
  b.set_constant("b", tot.size() - 1);
  CHECK_FALSE(evaluate(b.build(), build_sentence("PhiN", 1)));
}

TEST_CASE("the level-1 program spells out the paper rules") {
  const DatalogProgram p = build_datalog(1);
  const std::string text = to_string(p);
  CHECK(text.find("Total(x, y) :- S(x, y)") != std::string::npos);
  CHECK(p.goal == "G");
  CHECK(p.find_intensional("RTotal1") != nullptr);
  const DatalogProgram p2 = build_datalog(2);
  for (const char* name : {"Succ2", "NotPartialSucc2", "Total2", "RTotal2"}) CHECK(p2.find_intensional(name));
}
