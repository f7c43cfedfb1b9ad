#include "doctest.h"
#include "formula_gen.hpp"
#include "helpers.hpp"

#include "extclosed/errors.hpp"
#include "extclosed/evaluate.hpp"
#include "extclosed/formula.hpp"

using namespace extclosed;
using Names = std::vector<std::string>;

namespace {

// Direct Tarskian evaluation, no planning: the reference for the evaluator.
bool brute(const Structure& a, const Formula& f, Assignment& env) {
  auto term = [&](const Term& t) { return t.is_variable() ? env.at(t.name) : a.constant(t.name); };
  switch (f.kind()) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Atom: {
      const Relation& r = a.relation(f.relation());
      return f.terms().size() == 1 ? r.contains(term(f.terms()[0])) : r.contains(term(f.terms()[0]), term(f.terms()[1]));
    }
    case FormulaKind::Equal:
      return term(f.terms()[0]) == term(f.terms()[1]);
    case FormulaKind::Not:
      return !brute(a, f.child(), env);
    case FormulaKind::And:
      for (const auto& c : f.children())
        if (!brute(a, c, env)) return false;
      return true;
    case FormulaKind::Or:
      for (const auto& c : f.children())
        if (brute(a, c, env)) return true;
      return false;
    case FormulaKind::Implies:
      return !brute(a, f.child(0), env) || brute(a, f.child(1), env);
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      const bool ex = f.kind() == FormulaKind::Exists;
      auto saved = env.find(f.variable()) == env.end() ? std::optional<Element>{} : std::optional(env[f.variable()]);
      bool result = !ex;
      for (Element e = 1; e <= a.size(); ++e) {
        env[f.variable()] = e;
        if (brute(a, f.child(), env) == ex) {
          result = ex;
          break;
        }
      }
      if (saved)
        env[f.variable()] = *saved;
      else
        env.erase(f.variable());
      return result;
    }
  }
  return false;
}

bool brute(const Structure& a, const Formula& f) {
  Assignment env;
  return brute(a, f, env);
}

}  // namespace

TEST_CASE("parsing and printing") {
  const Vocabulary v = testing::ordered_vocab();
  const Formula f = parse_formula("exists x. exists y. R(x,y)", v);
  CHECK(f == Formula::exists(Names{"x", "y"}, Formula::atom("R", {Term::var("x"), Term::var("y")})));
  CHECK_THROWS_AS(parse_formula("R(x)", v), VocabularyError);
  CHECK_THROWS_AS(parse_formula("exists x. R(x,", v), ParseError);
  CHECK_THROWS_AS(parse_formula("Q(x)", v), VocabularyError);
  const Formula g = parse_formula("forall x. (U(x) -> exists y. (x <= y & !(x = y)) | S(x,x))", v);
  CHECK(parse_formula(to_string(g), v) == g);
  CHECK(parse_formula("exists  x .R( x ,x)", v) == parse_formula("exists x. R(x,x)", v));

  testing::FormulaGen gen(1);
  for (int t = 0; t < 200; ++t) {
    const Formula r = gen.sentence(4);
    CHECK(parse_formula(to_string(r), v) == r);
  }
}

TEST_CASE("constants parse as constants") {
  const Vocabulary v = testing::ordered_vocab().with_constant("c");
  const Formula f = parse_formula("U(c) & U(x)", v);
  CHECK(free_variables(f) == std::set<std::string>{"x"});
}

TEST_CASE("evaluation on the paper structures") {
  const ScaleParams p{1, 1, {}};
  const Formula phi = build_sentence("SomeTotalR", 1);
  CHECK(evaluate(build_Tot(p), phi));
  CHECK_FALSE(evaluate(build_Gap(p), phi));
  const Formula xx = Formula::equal(Term::var("x"), Term::var("x"));
  CHECK(evaluate(build_L(3), xx, {{"x", 2}}));
  CHECK_THROWS_AS(evaluate(build_L(3), xx), EvaluationError);
  CHECK_THROWS_AS(evaluate(build_L(3), xx, {{"x", 7}}), EvaluationError);
  CHECK_THROWS_AS(evaluate(build_L(3), Formula::atom("R", {Term::var("x"), Term::var("x")}), {{"x", 1}}),
                  VocabularyError);
}

TEST_CASE("evaluator agrees with direct evaluation") {
  testing::FormulaGen gen(2);
  Rng rng(2);
  for (int t = 0; t < 400; ++t) {
    const Structure a = testing::small_ordered(rng, 5);
    const Formula f = gen.sentence(5);
    CHECK_MESSAGE(evaluate(a, f) == brute(a, f), to_string(f));
  }
}

TEST_CASE("Total and Succ have the expected free variables") {
  CHECK(free_variables(build_sentence("Total", 1)) == std::set<std::string>{"x", "y"});
  CHECK(free_variables(build_sentence("TotalN", 2)) == std::set<std::string>{"x", "y"});
  CHECK(is_sentence(build_sentence("SomeTotalRN", 3)));
  CHECK_THROWS(build_sentence("Nope", 1));
}

TEST_CASE("relativization") {
  const Formula f = Formula::exists("z", Formula::atom("S", {Term::var("z"), Term::var("z")}));
  const Formula expected = Formula::conjunction(
      {Formula::le(Term::var("x"), Term::var("y")),
       Formula::exists("z", Formula::conjunction({Formula::conjunction({Formula::le(Term::var("x"), Term::var("z")),
                                                                        Formula::le(Term::var("z"), Term::var("y"))}),
                                                  Formula::atom("S", {Term::var("z"), Term::var("z")})}))});
  CHECK(relativize(f, "x", "y") == expected);
  const Formula qf = Formula::atom("U", {Term::var("x")});
  CHECK(relativize(qf, "x", "y") == Formula::conjunction({Formula::le(Term::var("x"), Term::var("y")), qf}));

  testing::FormulaGen gen(3);
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const Structure a = testing::small_ordered(rng, 6);
    const Formula s = gen.sentence(4);
    const Element lo = 1 + static_cast<Element>(rng() % a.size());
    const Element hi = lo + static_cast<Element>(rng() % (a.size() - lo + 1));
    CHECK_MESSAGE(evaluate(a, relativize(s, "x", "y"), {{"x", lo}, {"y", hi}}) ==
                      evaluate(induced_substructure(a, lo, hi), s),
                  to_string(s));
  }
}

TEST_CASE("relativization renames clashing bound variables") {
  const Formula f = Formula::exists("x", Formula::atom("U", {Term::var("x")}));
  const Formula r = relativize(f, "x", "y");
  CHECK(free_variables(r) == std::set<std::string>{"x", "y"});
  StructureBuilder b(testing::ordered_vocab(), 4);
  b.set_natural_order("<=").add("U", 4);
  const Structure a = b.build();
  CHECK_FALSE(evaluate(a, r, {{"x", 1}, {"y", 3}}));
  CHECK(evaluate(a, r, {{"x", 1}, {"y", 4}}));
}

TEST_CASE("prenex normal form preserves truth") {
  testing::FormulaGen gen(4);
  Rng rng(4);
  for (int t = 0; t < 400; ++t) {
    const Structure a = testing::small_ordered(rng, 5);
    const Formula f = gen.sentence(4);
    const Formula p = to_pnf(f);
    CHECK(is_prenex(p));
    CHECK_MESSAGE(evaluate(a, f) == evaluate(a, p), to_string(f));
  }
  const Formula qf = Formula::atom("U", {Term::var("x")});
  CHECK(to_pnf(qf) == qf);
}

TEST_CASE("prefix classification") {
  const Vocabulary v = testing::ordered_vocab();
  const PrefixClass pi = classify_prefix(parse_formula("forall x. exists y. R(x,y)", v));
  CHECK(pi == PrefixClass{PrefixClass::Kind::Pi, 2, 1});
  CHECK(classify_prefix(parse_formula("R(x,y)", v)).blocks == 0);
  CHECK(classify_prefix(parse_formula("R(x,y)", v)).width == 0);
  CHECK(classify_prefix(parse_formula("exists x. exists y. forall z. R(x,y)", v)) ==
        PrefixClass{PrefixClass::Kind::Sigma, 2, 2});
  CHECK_THROWS(classify_prefix(parse_formula("U(x) & exists y. U(y)", v)));
  CHECK(to_string(PrefixClass{PrefixClass::Kind::Sigma, 3, 5}) == "Sigma(3,5)");
}

TEST_CASE("paper sentences have the stated prefix classes") {
  for (int n = 1; n <= 3; ++n) {
    const PrefixClass c = classify_prefix(to_pnf(build_sentence("SomeTotalRN", n)));
    CHECK(c.kind == PrefixClass::Kind::Sigma);
    CHECK(c.blocks == 2 * n + 1);
    const PrefixClass full = classify_prefix(to_pnf(build_sentence("FullQuery", n)));
    CHECK(full.kind == c.kind);
    CHECK(full.blocks == c.blocks);
  }
  CHECK(classify_prefix(to_pnf(build_sentence("SomeTotalR", 1))).blocks <= 3);
  for (int n = 1; n <= 2; ++n) {
    const PrefixClass c = classify_prefix(to_pnf(build_sentence("PhiN", n)));
    CHECK(c.kind == PrefixClass::Kind::Pi);
    CHECK(c.blocks <= 2 * n);
  }
}

TEST_CASE("existential sentences are preserved by extensions") {
  testing::FormulaGen gen(5);
  Rng rng(5);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const Structure a = testing::small_ordered(rng, 4);
    const Structure b = random_extension(a, rng).structure;
    for (int i = 0; i < 5; ++i) {
      const Formula f = gen.existential_sentence(4);
      if (!evaluate(a, f)) continue;
      ++checked;
      CHECK_MESSAGE(evaluate(b, f), to_string(f));
    }
  }
  CHECK(checked > 100);
}
