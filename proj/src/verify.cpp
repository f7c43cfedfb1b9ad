#include "extclosed/verify.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include "extclosed/constructions.hpp"
#include "extclosed/datalog.hpp"
#include "extclosed/errors.hpp"
#include "extclosed/evaluate.hpp"
#include "extclosed/formula.hpp"
#include "extclosed/games.hpp"
#include "extclosed/random.hpp"
#include "extclosed/structure_ops.hpp"

namespace extclosed {

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::RefusedBudget:
      return "refused-budget";
  }
  return "?";
}

bool SuiteReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

// The scaled profile for levels above 1: every copy count 3, tot1_len 8.
const char* const kScaledOverrides = "N_copies=3,tot_copies=3,gap_side=1,M_side=1,tot1_len=8";

struct Model {
  std::string label;
  ScaleParams params;
  std::optional<Structure> m, n;
};

class Context {
 public:
  explicit Context(const VerifyOptions& o) : options(o) {}

  VerifyOptions options;

  int trials(int fallback) const { return options.trials > 0 ? options.trials : fallback; }
  GameOptions game() const { return GameOptions{options.budget, options.threads}; }
  Rng rng(std::uint64_t salt) const { return Rng(options.seed * 0x9e3779b97f4a7c15ull + salt); }

  // M and N at full size for n=1, k=1,2 and scaled for n=2,3, k=1.
  std::vector<Model>& models() {
    if (models_.empty()) {
      auto scaled = parse_overrides(kScaledOverrides);
      models_.push_back({"n1k1", ScaleParams{1, 1, {}}, {}, {}});
      models_.push_back({"n1k2", ScaleParams{1, 2, {}}, {}, {}});
      models_.push_back({"n2k1-scaled", ScaleParams{2, 1, scaled}, {}, {}});
      models_.push_back({"n3k1-scaled", ScaleParams{3, 1, scaled}, {}, {}});
    }
    return models_;
  }
  Model& model(const std::string& label) {
    for (auto& m : models())
      if (m.label == label) {
        if (!m.m) m.m = build_M(m.params);
        if (!m.n) m.n = build_N(m.params);
        return m;
      }
    throw Error("unknown model " + label);
  }

 private:
  std::vector<Model> models_;
};

struct Check {
  std::string id;
  int criterion;
  std::string claim;
  std::vector<std::string> suites;
  std::function<Outcome(Context&)> run;
};

std::string yes(bool b) { return b ? "true" : "false"; }

Structure order_reduct(int m) {
  return reduct(build_L(m), Vocabulary({{std::string(kOrderSymbol), 2}}));
}

Structure chain_sum(int copies, int len) {
  std::vector<Structure> parts(static_cast<std::size_t>(copies), build_L(len));
  return ordered_sum_seq(parts);
}

Outcome game_outcome(const GameVerdict& v, bool expected) {
  std::ostringstream d;
  d << "holds=" << yes(v.holds) << " states=" << v.states;
  if (v.witness && !v.witness->empty()) {
    d << " witness=(";
    for (std::size_t i = 0; i < v.witness->size(); ++i) d << (i ? "," : "") << (*v.witness)[i];
    d << ")";
  }
  return {v.holds == expected, d.str()};
}

Outcome satisfaction(Context& ctx, const std::string& label) {
  Model& md = ctx.model(label);
  const int n = md.params.n;
  const Formula phi = build_sentence("SomeTotalRN", n);
  const DatalogProgram prog = build_datalog(n);
  const bool fo_m = evaluate(*md.m, phi), fo_n = evaluate(*md.n, phi);
  const bool dl_m = goal_holds(prog, *md.m), dl_n = goal_holds(prog, *md.n);
  std::ostringstream d;
  d << "|M|=" << md.m->size() << " |N|=" << md.n->size() << " FO: M=" << yes(fo_m) << " N=" << yes(fo_n)
    << "; Datalog: M=" << yes(dl_m) << " N=" << yes(dl_n);
  return {fo_m && !fo_n && dl_m && !dl_n, d.str()};
}

Outcome extension_closure(Context& ctx, const std::string& label) {
  Model& md = ctx.model(label);
  const auto report = check_extension_closed_sample(build_datalog(md.params.n), *md.m, ctx.trials(100),
                                                    ctx.options.seed + static_cast<std::uint64_t>(md.params.k));
  std::string d = std::to_string(report.failures) + " failures in " + std::to_string(report.trials) + " extensions";
  if (!report.counterexamples.empty()) d += "; first: " + report.counterexamples.front();
  return {report.failures == 0, d};
}

Outcome prefix_class_check(const std::string& name, int n, PrefixClass::Kind kind, int blocks, bool exact) {
  const PrefixClass c = classify_prefix(to_pnf(build_sentence(name, n)));
  const bool ok = c.kind == kind && (exact ? c.blocks == blocks : c.blocks <= blocks);
  return {ok, to_string(c)};
}

Outcome cross_sigma1_random(Context& ctx) {
  const int trials = ctx.trials(200);
  Rng rng = ctx.rng(1);
  const Formula fq = build_sentence("FullQuery", 1);
  const DatalogProgram prog = build_datalog(1);
  const double densities[] = {0.002, 0.01, 0.03};
  const double successor[] = {0.6, 0.85, 0.97};
  int disagreements = 0, positives = 0;
  std::string first;
  for (int t = 0; t < trials; ++t) {
    RandomStructureOptions o;
    o.max_size = 40;
    o.partial_successor = true;
    o.density = densities[t % 3];
    o.successor_density = successor[(t / 3) % 3];
    const Structure a = random_structure(sigma(1), rng, o);
    const bool f = evaluate(a, fq), g = goal_holds(prog, a);
    positives += f;
    if (f != g && disagreements++ == 0) first = " first at trial " + std::to_string(t);
  }
  return {disagreements == 0, std::to_string(disagreements) + " disagreements in " + std::to_string(trials) +
                                  " structures (" + std::to_string(positives) + " satisfy the query)" + first};
}

Outcome cross_constructed(Context& ctx) {
  int compared = 0, disagreements = 0;
  std::string where;
  const Formula fq1 = build_sentence("FullQuery", 1);
  const DatalogProgram prog1 = build_datalog(1);
  for (auto& m : ctx.models()) {
    Model& md = ctx.model(m.label);
    const Formula fqn = build_sentence("FullQuery", md.params.n);
    const DatalogProgram progn = build_datalog(md.params.n);
    for (const Structure* s : {&*md.m, &*md.n}) {
      const Structure low = reduct(*s, sigma(1));
      const std::string name = (s == &*md.m ? "M_" : "N_") + md.label;
      compared += 2;
      if (evaluate(low, fq1) != goal_holds(prog1, low)) ++disagreements, where += " " + name + "(level 1)";
      if (evaluate(*s, fqn) != goal_holds(progn, *s)) ++disagreements, where += " " + name;
    }
  }
  return {disagreements == 0,
          std::to_string(disagreements) + " disagreements in " + std::to_string(compared) + " comparisons" + where};
}

Outcome cross_sigma2_restricted(Context& ctx) {
  const int trials = ctx.trials(200);
  Rng rng = ctx.rng(2);
  const Formula fq = build_sentence("FullQuery", 2);
  const Formula ps1 = build_sentence("PartialSucc", 2);
  const Formula ps2 = build_sentence("PartialSuccN", 2);
  const DatalogProgram prog = build_datalog(2);
  int kept = 0, drawn = 0, disagreements = 0, positives = 0;
  while (kept < trials) {
    if (++drawn > 100 * trials) break;
    const Structure a = random_layered_structure(rng, 30);
    if (!evaluate(a, ps1) || !evaluate(a, ps2)) continue;
    ++kept;
    const bool f = evaluate(a, fq);
    positives += f;
    disagreements += f != goal_holds(prog, a);
  }
  return {disagreements == 0 && kept == trials,
          std::to_string(disagreements) + " disagreements in " + std::to_string(kept) + " structures (" +
              std::to_string(positives) + " satisfy the query, " + std::to_string(drawn - kept) +
              " draws outside the class skipped)"};
}

Vocabulary game_vocabulary() { return Vocabulary({{"<=", 2}, {"S", 2}, {"U", 1}}); }

Outcome oracle_equivalence(Context& ctx) {
  const int trials = ctx.trials(500);
  Rng rng = ctx.rng(3);
  const Vocabulary voc = game_vocabulary();
  int disagreements = 0, holds = 0;
  std::string first;
  for (int t = 0; t < trials; ++t) {
    auto [a, b] = random_game_pair(voc, rng, 5);
    GameSpec spec;
    spec.n = 1 + static_cast<int>(rng() % 2);
    spec.k = 1 + static_cast<int>(rng() % 2);
    spec.starred = rng() % 2 == 1;
    const bool fast = prefix_implies(a, b, spec, ctx.game()).holds;
    const bool slow = naive_game_search(a, b, spec, ctx.game()).holds;
    holds += fast;
    if (fast != slow && disagreements++ == 0) first = " first at trial " + std::to_string(t);
  }
  return {disagreements == 0, std::to_string(disagreements) + " disagreements in " + std::to_string(trials) +
                                  " pairs (" + std::to_string(holds) + " implications hold)" + first};
}

Outcome sum_composition(Context& ctx) {
  const int trials = ctx.trials(100);
  Rng rng = ctx.rng(4);
  const Vocabulary voc = game_vocabulary();
  int violations = 0, hypotheses = 0;
  for (int t = 0; t < trials; ++t) {
    auto [a1, b1] = random_game_pair(voc, rng, 4);
    auto [a2, b2] = random_game_pair(voc, rng, 4);
    GameSpec spec;
    spec.n = 1 + static_cast<int>(rng() % 2);
    spec.k = 1;
    auto c = check_ordered_sum_composition(a1, a2, b1, b2, spec, {}, {}, ctx.game());
    hypotheses += c.hypothesis;
    violations += !c.holds();
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(trials) + " trials (" +
                               std::to_string(hypotheses) + " with the hypothesis true)"};
}

Outcome minmax_composition(Context& ctx) {
  const int trials = ctx.trials(100);
  Rng rng = ctx.rng(5);
  const Vocabulary voc = game_vocabulary();
  int violations = 0, hypotheses = 0;
  for (int t = 0; t < trials; ++t) {
    auto [a, b] = random_game_pair(voc, rng, 5);
    GameSpec spec;
    spec.n = 1 + static_cast<int>(rng() % 2);
    spec.k = 1;
    const bool unary = rng() % 2 == 0;
    auto c = check_minmax_composition(a, b, spec, unary ? "U" : "T", unary ? 1 : 2, ctx.game());
    hypotheses += c.hypothesis;
    violations += !c.holds();
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(trials) + " trials (" +
                               std::to_string(hypotheses) + " with the hypothesis true)"};
}

Outcome rho_values(Context&) {
  const std::map<std::pair<int, int>, long long> expected = {{{1, 1}, 4},  {{2, 1}, 15}, {{3, 1}, 48},
                                                              {{1, 2}, 6},  {{2, 2}, 28}, {{3, 2}, 116},
                                                              {{1, 3}, 8},  {{2, 3}, 45}};
  std::string bad;
  for (const auto& [nk, v] : expected)
    if (rho(nk.first, nk.second) != v) bad += " rho(" + std::to_string(nk.first) + "," + std::to_string(nk.second) + ")";
  for (int k = 1; k <= 8; ++k)
    for (int n = 1; n < 8; ++n)
      if (rho(n + 1, k) != (k + 2) * (rho(n, k) + 1)) bad += " step(" + std::to_string(n) + "," + std::to_string(k) + ")";
  return {bad.empty(), bad.empty() ? "recursion and tabulated values agree" : "mismatch:" + bad};
}

Count power(Count b, int e) {
  Count r = 1;
  while (e-- > 0) r *= b;
  return r;
}

Outcome power_bound(Context&) {
  std::string bad;
  for (int n = 1; n <= 8; ++n)
    for (int k = 1; k <= 8; ++k)
      if (!(2 * power(k + 3, n) > rho(n, k))) bad += " (" + std::to_string(n) + "," + std::to_string(k) + ")";
  return {bad.empty(), bad.empty() ? "2(k+3)^n > rho(n,k) for n,k <= 8" : "fails at" + bad};
}

Outcome tot1_bound(Context&) {
  std::string bad;
  for (int k = 1; k <= 8; ++k) {
    const Count m = 6 * static_cast<Count>(k + 2) * (k + 2);
    if (ScaleParams::default_tot1_len(k) != m) bad += " len(k=" + std::to_string(k) + ")";
    if (!(m > 2 * rho(2, k) + static_cast<Count>(k + 2) * (2 * k + 4))) bad += " bound(k=" + std::to_string(k) + ")";
    if (!(m / 2 - k - 1 > rho(2, k))) bad += " half(k=" + std::to_string(k) + ")";
  }
  return {bad.empty(), bad.empty() ? "6(k+2)^2 > 2rho(2,k)+(k+2)(2k+4) and m/2-k-1 > rho(2,k) for k <= 8"
                                   : "fails at" + bad};
}

Outcome copy_bounds(Context&) {
  std::string bad;
  for (int k = 1; k <= 8; ++k)
    for (int j = 1; j <= 8; ++j) {
      const Count nc = ScaleParams::default_n_copies(j, k);
      const Count r_n = rho(2 * j + 1, k);
      if (nc != 4 * power(k + 3, 2 * j + 1) + 2 * k + 1 || nc % 2 == 0 || !(nc > 2 * r_n + k + 1) ||
          !((nc - 1) / 2 > r_n))
        bad += " N(" + std::to_string(j) + "," + std::to_string(k) + ")";
      if (j < 2) continue;
      const Count tc = ScaleParams::default_tot_copies(j, k);
      const Count r_t = rho(2 * j, k);
      if (tc != 4 * power(k + 3, 2 * j) + 2 * k + 1 || tc % 2 == 0 || !(tc > 2 * r_t + k + 1) ||
          !((tc - 1) / 2 > r_t))
        bad += " Tot(" + std::to_string(j) + "," + std::to_string(k) + ")";
    }
  return {bad.empty(), bad.empty() ? "copy counts exceed 2rho+k+1 and half-counts exceed rho for j,k <= 8"
                                   : "fails at" + bad};
}

const std::vector<Check>& registry() {
  static const std::vector<Check> checks = [] {
    std::vector<Check> c;
    const std::vector<std::string> paper{"paper"}, comp{"composition"}, lin{"linear-orders"},
        cross{"cross-validate"};
    auto game = [](const Structure& a, const Structure& b, int n, int k, bool starred, bool expected) {
      return [=](Context& ctx) {
        return game_outcome(prefix_implies(a, b, GameSpec{n, k, starred, {}}, ctx.game()), expected);
      };
    };

    for (const char* label : {"n1k1", "n1k2", "n2k1-scaled", "n3k1-scaled"}) {
      const std::string l = label;
      c.push_back({"satisfaction." + l, 1, "M satisfies SomeTotalR_n and N does not, by FO and by Datalog (" + l + ")",
                   paper, [l](Context& ctx) { return satisfaction(ctx, l); }});
      c.push_back({"extension-closure." + l, 9, "random extensions of M keep the Datalog goal (" + l + ")", paper,
                   [l](Context& ctx) { return extension_closure(ctx, l); }});
    }

    c.push_back({"cross.sigma1-random", 2, "FullQuery_1 and the level-1 program agree on random structures", cross,
                 cross_sigma1_random});
    c.push_back({"cross.constructed", 2, "FullQuery and the program agree on the constructed M and N", cross,
                 cross_constructed});
    c.push_back({"cross.sigma2-restricted", 2,
                 "FullQuery_2 and the level-2 program agree where PartialSucc and PartialSucc_2 hold", cross,
                 cross_sigma2_restricted});

    for (int n = 1; n <= 3; ++n)
      c.push_back({"prefix-class.SomeTotalR.n" + std::to_string(n), 3,
                   "SomeTotalR_" + std::to_string(n) + " is Sigma with exactly " + std::to_string(2 * n + 1) +
                       " blocks",
                   paper, [n](Context&) {
                     return prefix_class_check("SomeTotalRN", n, PrefixClass::Kind::Sigma, 2 * n + 1, true);
                   }});
    for (int n = 1; n <= 2; ++n)
      c.push_back({"prefix-class.phi.n" + std::to_string(n), 3,
                   "phi_" + std::to_string(n) + " is Pi with at most " + std::to_string(2 * n) + " blocks", paper,
                   [n](Context&) { return prefix_class_check("PhiN", n, PrefixClass::Kind::Pi, 2 * n, false); }});

    c.push_back({"game.tot-gap.n2k1", 4, "Tot(1,1) =>_{2,1} Gap(1,1) at full size", paper, [](Context& ctx) {
                   const ScaleParams p{1, 1, {}};
                   return game_outcome(prefix_implies(build_Tot(p), build_Gap(p), GameSpec{2, 1, false, {}}, ctx.game()),
                                       true);
                 }});

    c.push_back({"game.L5-L6.star", 5, "L5* =>_{1,1} L6*", lin, game(build_L(5), build_L(6), 1, 1, true, true)});
    c.push_back(
        {"game.L16-L17.star", 5, "L16* =>_{2,1} L17*", lin, game(build_L(16), build_L(17), 2, 1, true, true)});
    c.push_back({"game.G4-L4.star", 5, "G4* =>_{1,1} L4*", lin, game(build_G(4), build_L(4), 1, 1, true, true)});
    c.push_back({"rank.L16-L17", 5, "L16 and L17 (as linear orders) agree up to quantifier rank 4", lin,
                 [](Context& ctx) {
                   const bool r = rank_equiv(order_reduct(16), order_reduct(17), 4, ctx.game());
                   return Outcome{r, "equivalent=" + yes(r)};
                 }});
    c.push_back({"rank.L2-L3", 5, "L2 and L3 (as linear orders) differ at quantifier rank 2", lin, [](Context& ctx) {
                   const bool r = rank_equiv(order_reduct(2), order_reduct(3), 2, ctx.game());
                   return Outcome{!r, "equivalent=" + yes(r)};
                 }});
    c.push_back({"game.G4-L5.star", 0, "G4* =>_{1,1} L5*", lin, game(build_G(4), build_L(5), 1, 1, true, true)});
    c.push_back({"game.L5-L4.star", 0, "L5* =>_{1,1} L4* fails (length 4 is not above rho(1,1))", lin,
                 game(build_L(5), build_L(4), 1, 1, true, false)});
    c.push_back({"prefix.L20-L21", 0, "L20 and L21 are (2,1)-prefix equivalent", lin, [](Context& ctx) {
                   const bool r = prefix_equiv(build_L(20), build_L(21), GameSpec{2, 1, false, {}}, ctx.game());
                   return Outcome{r, "equivalent=" + yes(r)};
                 }});
    c.push_back({"prefix.L2-L3", 0, "L2 and L3 are not (2,1)-prefix equivalent", lin, [](Context& ctx) {
                   const bool r = prefix_equiv(build_L(2), build_L(3), GameSpec{2, 1, false, {}}, ctx.game());
                   return Outcome{!r, "equivalent=" + yes(r)};
                 }});

    c.push_back({"oracle.random", 6, "memoized and naive game search agree on random pairs", cross,
                 oracle_equivalence});

    c.push_back({"composition.ordered-sum", 7, "componentwise starred implication carries over to ordered sums", comp,
                 sum_composition});
    c.push_back({"composition.minmax", 7, "starred implication carries over to min/max expansions", comp,
                 minmax_composition});
    c.push_back({"composition.ordered-sum.L3", 0, "identity instance on L3", comp, [](Context& ctx) {
                   const Structure l = build_L(3);
                   auto r = check_ordered_sum_composition(l, l, l, l, GameSpec{1, 1, true, {}}, {}, {}, ctx.game());
                   return Outcome{r.hypothesis && r.conclusion, "conclusion=" + yes(r.conclusion)};
                 }});
    c.push_back({"composition.minmax.L5-L6", 0, "L5*=>L6* gives the R-expansions", comp, [](Context& ctx) {
                   auto r = check_minmax_composition(build_L(5), build_L(6), GameSpec{1, 1, true, {}}, "R", 2,
                                                     ctx.game());
                   return Outcome{r.hypothesis && r.conclusion,
                                  "hypothesis=" + yes(r.hypothesis) + " conclusion=" + yes(r.conclusion)};
                 }});
    c.push_back({"sequence-sum.L3x4-L3x5", 0, "(4 copies of L3)* =>_{1,1} (5 copies of L3)*", comp,
                 game(chain_sum(4, 3), chain_sum(5, 3), 1, 1, true, true)});
    c.push_back({"sequence-sum.L3x16-L3x15", 0, "(16 copies of L3)* =>_{2,1} (15 copies of L3)*", comp,
                 game(chain_sum(16, 3), chain_sum(15, 3), 2, 1, true, true)});

    c.push_back({"arith.rho", 8, "rho recursion and tabulated values", paper, rho_values});
    c.push_back({"arith.power-bound", 8, "2(k+3)^n > rho(n,k)", paper, power_bound});
    c.push_back({"arith.tot1-bound", 8, "tot1 length bounds", paper, tot1_bound});
    c.push_back({"arith.copy-bounds", 8, "default copy counts exceed 2rho+k+1", paper, copy_bounds});

    std::sort(c.begin(), c.end(), [](const Check& a, const Check& b) { return a.id < b.id; });
    return c;
  }();
  return checks;
}

CheckResult run_check(const Check& check, Context& ctx) {
  CheckResult r;
  r.id = check.id;
  r.claim = check.claim;
  r.criterion = check.criterion;
  const auto start = std::chrono::steady_clock::now();
  try {
    Outcome o = check.run(ctx);
    r.status = o.ok ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = std::move(o.detail);
  } catch (const BudgetExceeded& e) {
    r.status = CheckStatus::RefusedBudget;
    r.detail = e.what();
  } catch (const std::exception& e) {
    r.status = CheckStatus::Fail;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"paper", "composition", "linear-orders", "cross-validate", "all"};
  return names;
}

SuiteReport run_suite(std::string_view suite, const VerifyOptions& options) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw Error("unknown suite '" + std::string(suite) + "'");
  Context ctx(options);
  SuiteReport report;
  report.suite = std::string(suite);
  report.seed = options.seed;
  report.trials = options.trials;
  for (const Check& check : registry()) {
    const bool selected = suite == "all" || std::find(check.suites.begin(), check.suites.end(), suite) !=
                                                check.suites.end();
    if (selected) report.checks.push_back(run_check(check, ctx));
  }
  return report;
}

std::string format_report(const SuiteReport& report) {
  std::ostringstream out;
  out << "suite " << report.suite << " (seed " << report.seed << ")\n";
  for (const auto& c : report.checks) {
    out << std::left << std::setw(15) << to_string(c.status) << std::setw(34) << c.id << std::right << std::fixed
        << std::setprecision(2) << std::setw(8) << c.seconds << "s  " << c.detail << "\n";
  }
  int pass = 0, fail = 0, refused = 0;
  for (const auto& c : report.checks)
    (c.status == CheckStatus::Pass ? pass : c.status == CheckStatus::Fail ? fail : refused)++;
  out << pass << " passed, " << fail << " failed, " << refused << " refused\n";
  return out.str();
}

}  // namespace extclosed
