#include "extclosed/constructions.hpp"

#include <algorithm>
#include <optional>
#include <cctype>
#include <regex>
#include <tuple>

#include "extclosed/errors.hpp"
#include "extclosed/structure_ops.hpp"

namespace extclosed {

std::string count_to_string(Count c) {
  if (c == 0) return "0";
  bool neg = c < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(c + 1)) + 1 : static_cast<unsigned __int128>(c);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

namespace {

constexpr Count kCountCap = static_cast<Count>(1) << 120;

Count sat_mul(Count a, Count b) {
  if (a == 0 || b == 0) return 0;
  if (a > kCountCap / b) return kCountCap;
  return a * b;
}

Count sat_add(Count a, Count b) { return std::min(kCountCap, a + b); }

Count power(Count base, int exp) {
  Count r = 1;
  for (int i = 0; i < exp; ++i) r = sat_mul(r, base);
  return r;
}

void require_level(int n, int k) {
  if (n < 1 || k < 1) throw Error("levels and widths start at 1");
}

}  // namespace

Count rho(int n, int k) {
  require_level(n, k);
  Count r = 2 * static_cast<Count>(k) + 2;
  for (int i = 1; i < n; ++i) r = sat_mul(k + 2, sat_add(r, 1));
  return r;
}

std::string succ_symbol(int j) { return j == 1 ? "S" : "S" + std::to_string(j); }
std::string r_symbol(int j) { return j == 1 ? "R" : "R" + std::to_string(j); }
std::string p_symbol(int j) {
  if (j < 2) throw Error("P symbols start at level 2");
  return "P" + std::to_string(j);
}

Vocabulary sigma(int n) {
  if (n < 1) throw Error("sigma_n needs n >= 1");
  std::vector<RelationSymbol> rels{{std::string(kOrderSymbol), 2}, {"S", 2}, {"R", 2}};
  for (int j = 2; j <= n; ++j) {
    rels.push_back({succ_symbol(j), 2});
    rels.push_back({r_symbol(j), 2});
    rels.push_back({p_symbol(j), 1});
  }
  return Vocabulary(rels);
}

// ---------------------------------------------------------------------------
// Scale parameters

namespace {

const std::regex kOverrideKey(R"(^(tot1_len|tot_copies|gap_side|N_copies|M_side)(\((\d+)\))?$)");

std::optional<long long> lookup(const std::map<std::string, long long>& o, const std::string& base, int j) {
  if (auto it = o.find(base + "(" + std::to_string(j) + ")"); it != o.end()) return it->second;
  if (auto it = o.find(base); it != o.end()) return it->second;
  return std::nullopt;
}

std::optional<Count> copies_override(const std::map<std::string, long long>& o, const std::string& copies,
                                     const std::string& side, int j) {
  if (auto c = lookup(o, copies, j)) return *c;
  if (auto s = lookup(o, side, j)) return 2 * static_cast<Count>(*s) + 1;
  return std::nullopt;
}

}  // namespace

std::map<std::string, long long> parse_overrides(std::string_view text) {
  std::map<std::string, long long> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string item(text.substr(pos, comma - pos));
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (!item.empty()) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw Error("override '" + item + "' is not key=value");
      std::string key = item.substr(0, eq);
      long long value = 0;
      try {
        std::size_t used = 0;
        value = std::stoll(item.substr(eq + 1), &used);
        if (used != item.size() - eq - 1) throw Error("");
      } catch (const std::exception&) {
        throw Error("override '" + item + "' has a non-integer value");
      }
      if (!std::regex_match(key, kOverrideKey)) throw Error("unknown override key '" + key + "'");
      out[key] = value;
    }
    pos = comma + 1;
  }
  return out;
}

void ScaleParams::validate() const {
  require_level(n, k);
  for (const auto& [key, value] : overrides) {
    std::smatch m;
    if (!std::regex_match(key, m, kOverrideKey)) throw Error("unknown override key '" + key + "'");
    const std::string base = m[1];
    if (m[2].matched && std::stoi(m[3]) < 1) throw Error("override level must be >= 1 in '" + key + "'");
    if (base == "tot1_len") {
      if (m[2].matched) throw Error("tot1_len takes no level");
      if (value < 4 || value % 2 != 0) throw Error("tot1_len must be even and >= 4");
    } else if (base == "tot_copies" || base == "N_copies") {
      if (value < 3 || value % 2 == 0) throw Error(key + " must be odd and >= 3");
    } else if (value < 1) {
      throw Error(key + " must be >= 1");
    }
  }
  for (int j = 1; j <= n; ++j) {
    auto check = [&](const std::string& copies, const std::string& side) {
      auto c = lookup(overrides, copies, j);
      auto s = lookup(overrides, side, j);
      if (c && s && *c != 2 * *s + 1)
        throw Error(copies + " and " + side + " disagree at level " + std::to_string(j));
    };
    check("tot_copies", "gap_side");
    check("N_copies", "M_side");
  }
}

Count ScaleParams::default_tot1_len(int k) { return 6 * power(k + 2, 2); }
Count ScaleParams::default_tot_copies(int j, int k) { return sat_add(sat_mul(4, power(k + 3, 2 * j)), 2 * k + 1); }
Count ScaleParams::default_n_copies(int j, int k) {
  return sat_add(sat_mul(4, power(k + 3, 2 * j + 1)), 2 * k + 1);
}

Count ScaleParams::tot1_len() const {
  if (auto it = overrides.find("tot1_len"); it != overrides.end()) return it->second;
  return default_tot1_len(k);
}
Count ScaleParams::tot_copies(int j) const {
  if (auto c = copies_override(overrides, "tot_copies", "gap_side", j)) return *c;
  return default_tot_copies(j, k);
}
Count ScaleParams::n_copies(int j) const {
  if (auto c = copies_override(overrides, "N_copies", "M_side", j)) return *c;
  return default_n_copies(j, k);
}

FamilySizes family_sizes(const ScaleParams& p, int level) {
  p.validate();
  if (level < 1) throw Error("level must be >= 1");
  FamilySizes s;
  s.tot = s.gap = p.tot1_len();
  for (int j = 1;; ++j) {
    if (j > 1) {
      // Tot_j and Gap_j are sums of tot_copies(j) structures of size |M_{j-1}|.
      s.tot = s.gap = sat_add(sat_mul(p.tot_copies(j), s.m - 1), 1);
    }
    s.n = s.m = sat_add(sat_mul(p.n_copies(j), s.gap - 1), 1);
    if (j == level) return s;
  }
}

// ---------------------------------------------------------------------------
// Structures

Structure build_L(int m) {
  if (m < 1) throw Error("L_m needs m >= 1");
  StructureBuilder b(Vocabulary({{std::string(kOrderSymbol), 2}, {"S", 2}}), m);
  b.set_natural_order(kOrderSymbol);
  for (Element i = 1; i < m; ++i) b.add("S", i, i + 1);
  return b.build();
}

Structure build_G(int m) {
  if (m < 4) throw Error("G_m needs m >= 4");
  const Element c = (m + 1) / 2;
  StructureBuilder b(Vocabulary({{std::string(kOrderSymbol), 2}, {"S", 2}}), m);
  b.set_natural_order(kOrderSymbol);
  for (Element i = 1; i < m; ++i)
    if (i != c - 1) b.add("S", i, i + 1);
  return b.build();
}

namespace {

void check_buildable(Count size) {
  if (size > kMaxBuildElements)
    throw StructureError("structure would have " + count_to_string(size) + " elements; the limit is " +
                         std::to_string(kMaxBuildElements));
}

int to_int(Count c) { return static_cast<int>(c); }

Structure tot1(const ScaleParams& p, bool gap) {
  const int m = to_int(p.tot1_len());
  StructureBuilder b(sigma(1), m);
  b.set_natural_order(kOrderSymbol);
  for (Element i = 1; i < m; ++i)
    if (!(gap && i == m / 2)) b.add("S", i, i + 1);
  b.add("R", 1, m);
  return b.build();
}

/// `copies` copies of `filler` with the central one replaced by `center`.
Structure sum_with_center(const Structure& filler, const Structure& center, Count copies) {
  std::vector<Structure> parts(static_cast<std::size_t>(copies), filler);
  parts[static_cast<std::size_t>((copies - 1) / 2)] = center;
  return ordered_sum_seq(parts);
}

Structure plus(const Structure& s, int level) {
  return minmax_expand(expand_vocabulary(s, sigma(level)), p_symbol(level), succ_symbol(level));
}

struct Level {
  std::optional<Structure> tot, gap;
};

// Tot_j and Gap_j.
Level tot_gap(const ScaleParams& p, int j);

struct MN {
  std::optional<Structure> m, n;
};

MN m_n(const ScaleParams& p, int j, bool want_m, bool want_n) {
  Level l = tot_gap(p, j);
  MN out;
  if (want_n) out.n = sum_with_center(*l.gap, *l.gap, p.n_copies(j));
  if (want_m) out.m = sum_with_center(*l.gap, *l.tot, p.n_copies(j));
  return out;
}

Level tot_gap(const ScaleParams& p, int j) {
  Level l;
  if (j == 1) {
    l.tot = tot1(p, false);
    l.gap = tot1(p, true);
    return l;
  }
  MN prev = m_n(p, j - 1, true, true);
  Structure m_plus = plus(*prev.m, j);
  Structure n_plus = plus(*prev.n, j);
  const std::string r = r_symbol(j);
  l.tot = minmax_expand(sum_with_center(m_plus, m_plus, p.tot_copies(j)), std::nullopt, r);
  l.gap = minmax_expand(sum_with_center(m_plus, n_plus, p.tot_copies(j)), std::nullopt, r);
  return l;
}

}  // namespace

Structure build_Tot(const ScaleParams& p) {
  check_buildable(family_sizes(p, p.n).tot);
  return *tot_gap(p, p.n).tot;
}

Structure build_Gap(const ScaleParams& p) {
  check_buildable(family_sizes(p, p.n).gap);
  return *tot_gap(p, p.n).gap;
}

Structure build_M(const ScaleParams& p) {
  check_buildable(family_sizes(p, p.n).m);
  return *m_n(p, p.n, true, false).m;
}

Structure build_N(const ScaleParams& p) {
  check_buildable(family_sizes(p, p.n).n);
  return *m_n(p, p.n, false, true).n;
}

// ---------------------------------------------------------------------------
// Sentences

namespace {

using Names = std::vector<std::string>;

Term V(const std::string& name) { return Term::var(name); }

class SentenceBuilder {
 public:
  Formula nlo() {
    Term x = V("x"), y = V("y"), z = V("z");
    return Formula::disjunction({
        Formula::exists("x", Formula::negation(Formula::le(x, x))),
        Formula::exists(Names{"x", "y"}, Formula::conjunction({Formula::le(x, y), Formula::le(y, x),
                                                          Formula::negation(Formula::equal(x, y))})),
        Formula::exists(Names{"x", "y", "z"}, Formula::conjunction({Formula::le(x, y), Formula::le(y, z),
                                                               Formula::negation(Formula::le(x, z))})),
        Formula::exists(Names{"x", "y"},
                        Formula::conjunction({Formula::negation(Formula::le(x, y)), Formula::negation(Formula::le(y, x))})),
    });
  }

  // "b is the successor of a".
  Formula successor(const Term& a, const Term& b) {
    Term z = V("z");
    return Formula::conjunction(
        {Formula::lt(a, b),
         Formula::forall("z", Formula::implication(Formula::conjunction({Formula::le(a, z), Formula::le(z, b)}),
                                                   Formula::disjunction({Formula::equal(z, a), Formula::equal(z, b)})))});
  }

  Formula partial_succ(int j) {
    if (auto it = partial_succ_.find(j); it != partial_succ_.end()) return it->second;
    Term x = V("x"), y = V("y"), z = V("z");
    Formula f = j == 1 ? Formula::forall(Names{"x", "y"}, Formula::implication(Formula::atom("S", {x, y}), successor(x, y)))
                       : Formula::forall(
          Names{"x", "y"},
          Formula::implication(
              succ(j, "x", "y"),
              Formula::forall("z", Formula::implication(Formula::atom(p_symbol(j), {z}),
                                                        Formula::disjunction({Formula::le(z, x), Formula::le(y, z)})))));
    partial_succ_.emplace(j, f);
    return f;
  }

  // Succ_j(a, b) for j >= 2.
  Formula succ(int j, const std::string& a, const std::string& b) {
    auto key = std::make_tuple(j, a, b);
    if (auto it = succ_.find(key); it != succ_.end()) return it->second;
    Formula f = Formula::conjunction({Formula::atom(p_symbol(j), {V(a)}), Formula::atom(p_symbol(j), {V(b)}),
                                      Formula::atom(succ_symbol(j), {V(a), V(b)}),
                                      relativize(some_total_r(j - 1), a, b)});
    succ_.emplace(key, f);
    return f;
  }

  Formula total(int j, const Term& a, const Term& b) {
    Term z = V("z"), w = V("w");
    std::vector<Formula> guard;
    if (j > 1) guard.push_back(Formula::atom(p_symbol(j), {z}));
    guard.push_back(Formula::le(a, z));
    guard.push_back(Formula::lt(z, b));
    Formula step = j == 1 ? Formula::atom("S", {z, w}) : succ(j, "z", "w");
    return Formula::conjunction(
        {Formula::lt(a, b),
         Formula::forall("z", Formula::implication(
                                  Formula::conjunction(guard),
                                  Formula::exists("w", Formula::conjunction({Formula::lt(z, w), Formula::le(w, b), step}))))});
  }

  Formula some_total_r(int j) {
    if (auto it = some_total_r_.find(j); it != some_total_r_.end()) return it->second;
    Term x = V("x"), y = V("y");
    Formula f = Formula::disjunction(
        {Formula::negation(partial_succ(j)),
         Formula::exists(Names{"x", "y"}, Formula::conjunction({Formula::atom(r_symbol(j), {x, y}), total(j, x, y)}))});
    some_total_r_.emplace(j, f);
    return f;
  }

  Formula phi(int n) {
    Term a = Term::constant("a"), b = Term::constant("b");
    return Formula::disjunction(
        {Formula::negation(partial_succ(n)), Formula::conjunction({Formula::atom(r_symbol(n), {a, b}), total(n, a, b)})});
  }

 private:
  std::map<int, Formula> partial_succ_;
  std::map<int, Formula> some_total_r_;
  std::map<std::tuple<int, std::string, std::string>, Formula> succ_;
};

const std::vector<std::string> kSentenceNames{"NLO",   "PartialSucc",  "Total",  "SomeTotalR",  "Succ",
                                              "PartialSuccN", "TotalN", "SomeTotalRN", "FullQuery", "PhiN"};

void check_name(std::string_view name) {
  if (std::find(kSentenceNames.begin(), kSentenceNames.end(), name) == kSentenceNames.end())
    throw Error("unknown sentence '" + std::string(name) + "'");
}

}  // namespace

Formula build_sentence(std::string_view name, int n) {
  check_name(name);
  if (n < 1) throw Error("sentence level must be >= 1");
  SentenceBuilder sb;
  Term x = V("x"), y = V("y");
  if (name == "NLO") return sb.nlo();
  if (name == "PartialSucc") return sb.partial_succ(1);
  if (name == "Total") return sb.total(1, x, y);
  if (name == "SomeTotalR") return sb.some_total_r(1);
  if (name == "Succ") {
    if (n < 2) throw Error("Succ is defined for n >= 2");
    return sb.succ(n, "x", "y");
  }
  if (name == "PartialSuccN") return sb.partial_succ(n);
  if (name == "TotalN") return sb.total(n, x, y);
  if (name == "SomeTotalRN") return sb.some_total_r(n);
  if (name == "FullQuery") return Formula::disjunction({sb.nlo(), sb.some_total_r(n)});
  return sb.phi(n);
}

Vocabulary sentence_vocabulary(std::string_view name, int n) {
  check_name(name);
  if (name == "NLO" || name == "PartialSucc" || name == "Total" || name == "SomeTotalR") return sigma(1);
  Vocabulary v = sigma(n);
  if (name == "PhiN") v = v.with_constant("a").with_constant("b");
  return v;
}

// ---------------------------------------------------------------------------
// Datalog

namespace {

DatalogLiteral pos(const std::string& p, std::vector<std::string> vars) {
  std::vector<Term> args;
  for (auto& v : vars) args.push_back(Term::var(v));
  return DatalogLiteral::positive(p, std::move(args));
}
DatalogLiteral neg(const std::string& p, std::vector<std::string> vars) {
  DatalogLiteral l = pos(p, std::move(vars));
  l.negated = true;
  return l;
}
DatalogLiteral le(const std::string& a, const std::string& b) { return pos(std::string(kOrderSymbol), {a, b}); }
DatalogLiteral not_le(const std::string& a, const std::string& b) { return neg(std::string(kOrderSymbol), {a, b}); }
DatalogLiteral eq(const std::string& a, const std::string& b) { return DatalogLiteral::equal(V(a), V(b)); }
DatalogLiteral neq(const std::string& a, const std::string& b) { return DatalogLiteral::equal(V(a), V(b), true); }

DatalogAtom head(const std::string& p, std::vector<std::string> vars = {}) {
  DatalogAtom a{p, {}};
  for (auto& v : vars) a.args.push_back(Term::var(v));
  return a;
}

std::string total_name(int j) { return j == 1 ? "Total" : "Total" + std::to_string(j); }
std::string rtotal_name(int j) { return "RTotal" + std::to_string(j); }

}  // namespace

DatalogProgram build_datalog(int n) {
  if (n < 1) throw Error("program level must be >= 1");
  DatalogProgram p;
  p.extensional = sigma(n);
  p.goal = "G";
  auto& rules = p.rules;

  p.intensional.push_back({total_name(1), 2});
  p.intensional.push_back({rtotal_name(1), 2});
  rules.push_back({head("Total", {"x", "y"}), {pos("S", {"x", "y"})}});
  rules.push_back({head("Total", {"x", "y"}), {pos("S", {"x", "z"}), pos("Total", {"z", "y"})}});
  rules.push_back({head(rtotal_name(1), {"x", "y"}),
                   {le("x", "u"), le("v", "y"), pos("R", {"u", "v"}), pos("Total", {"u", "v"})}});

  for (int j = 2; j <= n; ++j) {
    const std::string succ = "Succ" + std::to_string(j), nps = "NotPartialSucc" + std::to_string(j);
    const std::string P = p_symbol(j), S = succ_symbol(j), R = r_symbol(j), T = total_name(j);
    p.intensional.push_back({succ, 2});
    p.intensional.push_back({nps, 0});
    p.intensional.push_back({T, 2});
    p.intensional.push_back({rtotal_name(j), 2});
    rules.push_back(
        {head(succ, {"x", "y"}), {pos(P, {"x"}), pos(P, {"y"}), pos(S, {"x", "y"}), pos(rtotal_name(j - 1), {"x", "y"})}});
    rules.push_back({head(nps), {pos(succ, {"x", "y"}), pos(P, {"z"}), le("x", "z"), le("z", "y"), neq("x", "z"),
                                 neq("y", "z")}});
    rules.push_back({head(T, {"x", "y"}), {pos(succ, {"x", "y"})}});
    rules.push_back({head(T, {"x", "y"}), {pos(succ, {"x", "z"}), pos(T, {"z", "y"})}});
    rules.push_back(
        {head(rtotal_name(j), {"x", "y"}), {le("x", "u"), le("v", "y"), pos(R, {"u", "v"}), pos(T, {"u", "v"})}});
  }

  p.intensional.push_back({"NLO", 0});
  rules.push_back({head("NLO"), {not_le("x", "x")}});
  rules.push_back({head("NLO"), {le("x", "y"), le("y", "x"), neq("x", "y")}});
  rules.push_back({head("NLO"), {le("x", "y"), le("y", "z"), not_le("x", "z")}});
  rules.push_back({head("NLO"), {not_le("x", "y"), not_le("y", "x")}});

  p.intensional.push_back({"NotPartialSucc", 0});
  rules.push_back(
      {head("NotPartialSucc"), {pos("S", {"x", "y"}), le("x", "z"), le("z", "y"), neq("x", "z"), neq("y", "z")}});
  rules.push_back({head("NotPartialSucc"), {pos("S", {"x", "y"}), not_le("x", "y")}});
  rules.push_back({head("NotPartialSucc"), {pos("S", {"x", "y"}), eq("x", "y")}});

  p.intensional.push_back({"G", 0});
  rules.push_back({head("G"), {pos("NLO", {})}});
  rules.push_back({head("G"), {pos("NotPartialSucc", {})}});
  if (n >= 2) rules.push_back({head("G"), {pos("NotPartialSucc" + std::to_string(n), {})}});
  rules.push_back({head("G"), {pos(r_symbol(n), {"u", "v"}), pos(total_name(n), {"u", "v"})}});
  return p;
}

}  // namespace extclosed
