#include "doctest.h"
#include "helpers.hpp"

#include "extclosed/datalog.hpp"
#include "extclosed/errors.hpp"
#include "extclosed/evaluate.hpp"

using namespace extclosed;

namespace {

const char* const kTotalProgram = R"(
.extensional <=/2
.extensional S/2
.intensional Total/2
Total(x, y) :- S(x, y)
Total(x, y) :- S(x, z), Total(z, y)
)";

std::vector<Tuple> strict_pairs(int m) {
  std::vector<Tuple> out;
  for (Element i = 1; i <= m; ++i)
    for (Element j = i + 1; j <= m; ++j) out.push_back({i, j});
  return out;
}

}  // namespace

TEST_CASE("validation") {
  const DatalogProgram total = parse_program(kTotalProgram);
  CHECK(validate(total));
  CHECK(validate(build_datalog(1)));
  CHECK(validate(build_datalog(2)));
  CHECK(validate(build_datalog(3)));

  DatalogProgram neg = total;
  neg.rules.push_back({{"Total", {Term::var("x"), Term::var("y")}},
                       {DatalogLiteral::positive("S", {Term::var("x"), Term::var("y")}),
                        DatalogLiteral::negative("Total", {Term::var("y"), Term::var("x")})}});
  auto v = violations(neg);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == 2);
  CHECK(v[0].literal == 1);

  DatalogProgram unsafe = total;
  unsafe.rules.push_back({{"Total", {Term::var("x"), Term::var("w")}},
                          {DatalogLiteral::positive("S", {Term::var("x"), Term::var("y")})}});
  CHECK_FALSE(validate(unsafe));

  DatalogProgram ext_head = total;
  ext_head.rules.push_back({{"S", {Term::var("x"), Term::var("y")}},
                            {DatalogLiteral::positive("Total", {Term::var("x"), Term::var("y")})}});
  CHECK_FALSE(validate(ext_head));

  CHECK_FALSE(validate(parse_program(".extensional S/2\n.intensional T/2\nT(x,y) :- S(x)\n")));
  CHECK_THROWS_AS(parse_program(".extensional S/2\nT(x,y) :- S(x,\n"), ParseError);
}

TEST_CASE("text round trip") {
  for (int n = 1; n <= 3; ++n) {
    const DatalogProgram p = build_datalog(n);
    CHECK(parse_program(to_string(p)) == p);
  }
  const DatalogProgram c = parse_program(".extensional U/1\n.constant c\n.intensional G/0\n.goal G\nG :- U(c)\n");
  CHECK(parse_program(to_string(c)) == c);
}

TEST_CASE("least fixpoints of the Total program") {
  const DatalogProgram total = parse_program(kTotalProgram);
  CHECK(eval_fixpoint(total, build_L(4)).table("Total") == strict_pairs(4));
  CHECK(eval_fixpoint(build_datalog(1), expand_vocabulary(build_L(5), sigma(1))).table("Total") == strict_pairs(5));
  // G_4 lacks S(1,2): nothing spanning that pair is derived.
  const std::vector<Tuple> g4 = {{2, 3}, {2, 4}, {3, 4}};
  CHECK(eval_fixpoint(total, build_G(4)).table("Total") == g4);

  DatalogProgram empty = total;
  empty.rules.clear();
  CHECK(eval_fixpoint(empty, build_L(4)).table("Total").empty());
}

TEST_CASE("goal queries") {
  const ScaleParams p{1, 1, {}};
  const DatalogProgram prog = build_datalog(1);
  CHECK(goal_holds(prog, build_Tot(p)));
  CHECK_FALSE(goal_holds(prog, build_Gap(p)));
  DatalogProgram none = prog;
  none.rules.clear();
  CHECK_FALSE(goal_holds(none, build_Tot(p)));
  DatalogProgram no_goal = parse_program(kTotalProgram);
  CHECK_THROWS(goal_holds(no_goal, build_L(3)));
  CHECK_THROWS_AS(goal_holds(prog, build_L(3)), VocabularyError);
}

TEST_CASE("equality literals and constants") {
  const DatalogProgram p = parse_program(R"(
.extensional <=/2
.extensional U/1
.constant c
.intensional Other/1
.intensional Below/1
Other(x) :- U(x), x != c
Below(x) :- U(x), x <= c, not x = c
)");
  StructureBuilder b(Vocabulary({{"<=", 2}, {"U", 1}}, {"c"}), 5);
  b.set_natural_order("<=").add("U", 1).add("U", 3).add("U", 5).set_constant("c", 3);
  const auto fp = eval_fixpoint(p, b.build());
  CHECK(fp.table("Other") == std::vector<Tuple>{{1}, {5}});
  CHECK(fp.table("Below") == std::vector<Tuple>{{1}});
}

TEST_CASE("semi-naive and naive evaluation agree") {
  Rng rng(21);
  for (int n = 1; n <= 2; ++n) {
    const DatalogProgram prog = build_datalog(n);
    for (int t = 0; t < 60; ++t) {
      Structure a = n == 1 ? random_structure(sigma(1), rng, {2, 40, 0.02, true, 0.85})
                           : random_layered_structure(rng, 40);
      CHECK(eval_fixpoint(prog, a) == eval_fixpoint_naive(prog, a));
    }
  }
  const ScaleParams scaled{2, 1, parse_overrides("N_copies=3,tot_copies=3,tot1_len=8")};
  for (const Structure& s : {build_M(scaled), build_N(scaled)})
    CHECK(eval_fixpoint(build_datalog(2), s) == eval_fixpoint_naive(build_datalog(2), s));
}

TEST_CASE("fixpoints grow with positively used relations") {
  Rng rng(22);
  const DatalogProgram prog = build_datalog(2);
  for (int t = 0; t < 60; ++t) {
    const Structure a = random_layered_structure(rng, 25);
    // R, R2 and S2 occur only positively in the program.
    std::vector<ElementPair> extra;
    for (int i = 0; i < 3; ++i) {
      Element x = 1 + static_cast<Element>(rng() % a.size()), y = 1 + static_cast<Element>(rng() % a.size());
      extra.emplace_back(std::min(x, y), std::max(x, y));
    }
    const char* rel = t % 3 == 0 ? "R" : t % 3 == 1 ? "R2" : "S2";
    const Structure b = testing::with_tuples(a, rel, extra);
    const auto small = eval_fixpoint(prog, a), big = eval_fixpoint(prog, b);
    for (const auto& [name, tuples] : small.tables)
      for (const auto& tup : tuples) CHECK(big.contains(name, tup));
  }
}

TEST_CASE("FO and Datalog agree on ordered partial successors") {
  Rng rng(23);
  const Formula fq = build_sentence("FullQuery", 1);
  const DatalogProgram prog = build_datalog(1);
  for (int t = 0; t < 150; ++t) {
    const Structure a = random_structure(sigma(1), rng, {1, 30, 0.01 * (t % 4), true, 0.9});
    CHECK(evaluate(a, fq) == goal_holds(prog, a));
  }
}

TEST_CASE("extension sampling") {
  const ScaleParams p{1, 1, {}};
  const DatalogProgram prog = build_datalog(1);
  const Structure tot = build_Tot(p);
  CHECK(check_extension_closed_sample(prog, tot, 100, 7).failures == 0);
  CHECK(check_extension_closed_sample(prog, tot, 0, 7).trials == 0);
  CHECK_THROWS(check_extension_closed_sample(prog, build_Gap(p), 5, 7));

  // A new element inside the total interval breaks PartialSucc.
  StructureBuilder b(sigma(1), tot.size() + 1);
  b.set_natural_order("<=");
  for (const auto& [x, y] : tot.relation("S").pairs()) b.add("S", x < 10 ? x : x + 1, y < 10 ? y : y + 1);
  b.add("R", 1, tot.size() + 1);
  const Structure bigger = b.build();
  CHECK_FALSE(check_partial_successor(bigger));
  CHECK(goal_holds(prog, bigger));
  CHECK(eval_fixpoint(prog, bigger).contains("NotPartialSucc", {}));
}
