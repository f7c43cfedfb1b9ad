#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "extclosed/constructions.hpp"
#include "extclosed/datalog.hpp"
#include "extclosed/errors.hpp"
#include "extclosed/evaluate.hpp"
#include "extclosed/formula.hpp"
#include "extclosed/games.hpp"
#include "extclosed/structure_ops.hpp"
#include "extclosed/verify.hpp"

using namespace extclosed;
using json = nlohmann::json;

namespace {

struct Global {
  std::uint64_t seed = VerifyOptions{}.seed;
  int trials = 0;
  std::uint64_t budget = GameOptions{}.budget;
  std::string report;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

void write_report(const Global& g, const json& j) {
  if (!g.report.empty()) write_file(g.report, j.dump(2) + "\n");
}

ScaleParams scale(int n, int k, const std::string& overrides) {
  ScaleParams p{n, k, overrides.empty() ? std::map<std::string, long long>{} : parse_overrides(overrides)};
  p.validate();
  return p;
}

Structure build_family(const std::string& family, int n, int k, int m, const std::string& overrides) {
  if (family == "L") return build_L(m);
  if (family == "G") return build_G(m);
  const ScaleParams p = scale(n, k, overrides);
  if (family == "Tot") return build_Tot(p);
  if (family == "Gap") return build_Gap(p);
  if (family == "M") return build_M(p);
  if (family == "N") return build_N(p);
  throw Error("unknown family '" + family + "'");
}

std::string tuple_text(const std::vector<Element>& t) {
  std::string s = "(";
  for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + ")";
}

// "Name/arity,..." with arity 0 for constants.
Vocabulary parse_vocab(const std::string& text) {
  std::vector<RelationSymbol> rels;
  std::vector<std::string> consts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto slash = item.rfind('/');
    if (slash == std::string::npos || slash == 0) throw Error("bad vocabulary item '" + item + "'");
    const std::string name = item.substr(0, slash);
    const int arity = std::stoi(item.substr(slash + 1));
    if (arity == 0)
      consts.push_back(name);
    else
      rels.push_back({name, arity});
  }
  return Vocabulary(std::move(rels), std::move(consts));
}

// Formula source: --sentence NAME (built in, level --level), --formula TEXT, or --formula-file PATH.
struct FormulaSource {
  std::string sentence, text, file;
  int level = 1;

  Formula get(const Vocabulary& vocab) const {
    const int given = !sentence.empty() + !text.empty() + !file.empty();
    if (given != 1) throw Error("give exactly one of --sentence, --formula, --formula-file");
    if (!sentence.empty()) return build_sentence(sentence, level);
    return parse_formula(text.empty() ? read_file(file) : text, vocab);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-model workbench: structures, FO and Datalog evaluation, prefix games."};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "Seed for randomized checks");
  app.add_option("--trials", g.trials, "Trials for randomized checks (0 = each check's default)");
  app.add_option("--budget", g.budget, "Game search state budget");
  app.add_option("--report", g.report, "Write a JSON report to this path");

  // build
  auto* build = app.add_subcommand("build", "Build a structure family and serialize it");
  std::string family, overrides, out_path;
  int bn = 1, bk = 1, bm = 1;
  bool compact = false;
  build->add_option("--family", family, "L, G, Tot, Gap, M or N")->required();
  build->add_option("--n", bn, "Level n");
  build->add_option("--k", bk, "Block width k");
  build->add_option("--m", bm, "Length for L and G");
  build->add_option("--override", overrides, "key=value,... (tot1_len, tot_copies(j), gap_side(j), N_copies(j), M_side(j))");
  build->add_option("--out", out_path, "Output path (default: stdout)");
  build->add_flag("--compact", compact, "Write natural orders as `order <name>`");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a formula or Datalog program on a structure");
  std::string mode = "fo", structure_path, program_path;
  int builtin_program = 0;
  FormulaSource fsrc;
  eval->add_option("structure", structure_path, "Structure file")->required();
  eval->add_option("--mode", mode, "fo or datalog")->check(CLI::IsMember({"fo", "datalog"}));
  eval->add_option("--sentence", fsrc.sentence, "Built-in sentence name");
  eval->add_option("--level", fsrc.level, "Level n of the built-in sentence or program");
  eval->add_option("--formula", fsrc.text, "Formula text");
  eval->add_option("--formula-file", fsrc.file, "Formula file");
  eval->add_option("--program", program_path, "Datalog program file");
  eval->add_flag("--builtin-program", builtin_program, "Use the built-in program at --level");

  // game
  auto* game = app.add_subcommand("game", "Decide A =>_{n,k} B");
  std::string a_path, b_path, explore, explore_overrides;
  int gn = 1, gk = 1, threads = 1;
  bool starred = false, naive = false;
  game->add_option("A", a_path, "Structure file A");
  game->add_option("B", b_path, "Structure file B");
  game->add_option("--n", gn, "Rounds (with --explore: the family level)");
  game->add_option("--k", gk, "Tuple width");
  game->add_flag("--starred", starred, "Respect min and max");
  game->add_flag("--naive", naive, "Use the history-based reference search");
  game->add_option("--threads", threads, "First-round worker threads");
  game->add_option("--explore", explore, "NM: N_{n,k} vs M_{n,k} at 2n+1 rounds; TotGap: Tot vs Gap at 2n rounds")
      ->check(CLI::IsMember({"NM", "TotGap"}));
  game->add_option("--override", explore_overrides, "Scale overrides for --explore");

  // pnf
  auto* pnf = app.add_subcommand("pnf", "Print a prenex normal form and its prefix class");
  FormulaSource psrc;
  std::string pnf_vocab;
  pnf->add_option("--vocab", pnf_vocab, "Vocabulary for --formula as Name/arity,... (constants /0; default sigma_level)");
  pnf->add_option("--sentence", psrc.sentence, "Built-in sentence name");
  pnf->add_option("--level", psrc.level, "Level n of the built-in sentence");
  pnf->add_option("--formula", psrc.text, "Formula text");
  pnf->add_option("--formula-file", psrc.file, "Formula file");

  // verify
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite = "all";
  verify->add_option("--suite", suite, "paper, composition, linear-orders, cross-validate or all")
      ->check(CLI::IsMember(suite_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*build) {
      const Structure s = build_family(family, bn, bk, bm, overrides);
      const std::string text = serialize(s, SerializeOptions{compact});
      json j{{"family", family}, {"size", s.size()}, {"ordered", check_ordered(s)}};
      std::ostream& info = out_path.empty() ? std::cerr : std::cout;
      info << family << ": " << s.size() << " elements";
      for (std::size_t r = 0; r < s.vocab().relations().size(); ++r) {
        const auto& name = s.vocab().relations()[r].name;
        info << ", |" << name << "|=" << s.relation(r).cardinality();
        j["relations"][name] = s.relation(r).cardinality();
      }
      info << "\n";
      if (out_path.empty())
        std::cout << text;
      else
        write_file(out_path, text);
      write_report(g, j);
      return 0;
    }

    if (*eval) {
      const Structure s = parse_structure(read_file(structure_path));
      bool result;
      if (mode == "fo") {
        result = evaluate(s, fsrc.get(s.vocab()));
      } else {
        if (builtin_program == (program_path.empty() ? 0 : 1))
          throw Error("give exactly one of --program, --builtin-program");
        const DatalogProgram prog = builtin_program ? build_datalog(fsrc.level) : parse_program(read_file(program_path));
        result = goal_holds(prog, s);
      }
      std::cout << (result ? "true" : "false") << "\n";
      write_report(g, json{{"mode", mode}, {"result", result}});
      return result ? 0 : 1;
    }

    if (*game) {
      std::optional<Structure> a, b;
      GameSpec spec{gn, gk, starred, {}};
      if (!explore.empty()) {
        const ScaleParams p = scale(gn, gk, explore_overrides);
        if (explore == "NM") {
          a = build_N(p), b = build_M(p), spec.n = 2 * gn + 1;
        } else {
          a = build_Tot(p), b = build_Gap(p), spec.n = 2 * gn;
        }
        std::cout << "exploratory: " << (explore == "NM" ? "N" : "Tot") << " (" << a->size() << ") vs "
                  << (explore == "NM" ? "M" : "Gap") << " (" << b->size() << ") at n=" << spec.n << ", k=" << gk
                  << "; no claim is asserted\n";
      } else {
        if (a_path.empty() || b_path.empty()) throw Error("game needs two structure files");
        a = parse_structure(read_file(a_path));
        b = parse_structure(read_file(b_path));
      }
      const GameOptions options{g.budget, threads};
      json j{{"n", spec.n}, {"k", spec.k}, {"starred", spec.starred}, {"naive", naive}};
      try {
        const GameVerdict v = naive ? naive_game_search(*a, *b, spec, options) : prefix_implies(*a, *b, spec, options);
        std::cout << (v.holds ? "holds" : "fails");
        if (!v.holds && v.witness) std::cout << " witness " << tuple_text(*v.witness);
        std::cout << " (" << v.states << " states)\n";
        j["status"] = v.holds ? "holds" : "fails";
        j["states"] = v.states;
        if (v.witness) j["witness"] = *v.witness;
        write_report(g, j);
        return v.holds ? 0 : 1;
      } catch (const BudgetExceeded& e) {
        std::cout << "refused: " << e.what() << "\n";
        j["status"] = "refused";
        write_report(g, j);
        return 2;
      }
    }

    if (*pnf) {
      const Formula p = to_pnf(psrc.get(pnf_vocab.empty() ? sigma(psrc.level) : parse_vocab(pnf_vocab)));
      const PrefixClass c = classify_prefix(p);
      std::cout << to_string(p) << "\n" << to_string(c) << "\n";
      write_report(g, json{{"pnf", to_string(p)}, {"class", to_string(c)}, {"blocks", c.blocks}, {"width", c.width}});
      return 0;
    }

    if (*verify) {
      VerifyOptions options;
      options.seed = g.seed;
      options.trials = g.trials;
      options.budget = g.budget;
      const SuiteReport report = run_suite(suite, options);
      std::cout << format_report(report);
      json j{{"suite", report.suite}, {"seed", report.seed}, {"trials", report.trials}, {"passed", report.passed()}};
      j["checks"] = json::object();
      for (const auto& c : report.checks)
        j["checks"][c.id] = {{"status", std::string(to_string(c.status))},
                             {"seconds", c.seconds},
                             {"claim", c.claim},
                             {"criterion", c.criterion},
                             {"detail", c.detail}};
      write_report(g, j);
      return report.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
