#include "extclosed/datalog.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "difference_bounds.hpp"
#include "extclosed/errors.hpp"
#include "extclosed/random.hpp"

namespace extclosed {

const RelationSymbol* DatalogProgram::find_intensional(std::string_view name) const {
  for (const auto& s : intensional)
    if (s.name == name) return &s;
  return nullptr;
}

const std::vector<Tuple>& FixpointInterpretation::table(std::string_view name) const {
  auto it = tables.find(std::string(name));
  if (it == tables.end()) throw Error("no intensional predicate '" + std::string(name) + "'");
  return it->second;
}

bool FixpointInterpretation::contains(std::string_view name, const Tuple& t) const {
  const auto& tab = table(name);
  return std::binary_search(tab.begin(), tab.end(), t);
}

// ---------------------------------------------------------------------------
// Validation

std::vector<DatalogViolation> violations(const DatalogProgram& program) {
  std::vector<DatalogViolation> out;
  auto report = [&](int rule, int literal, std::string msg) { out.push_back({rule, literal, std::move(msg)}); };

  std::set<std::string> seen;
  for (const auto& s : program.intensional) {
    if (!seen.insert(s.name).second) report(-1, -1, "intensional predicate '" + s.name + "' declared twice");
    if (s.arity < 0 || s.arity > 2) report(-1, -1, "intensional predicate '" + s.name + "' has arity outside 0..2");
    if (program.extensional.has_relation(s.name) || program.extensional.has_constant(s.name))
      report(-1, -1, "intensional predicate '" + s.name + "' clashes with an extensional symbol");
  }
  if (!program.goal.empty()) {
    const auto* g = program.find_intensional(program.goal);
    if (!g)
      report(-1, -1, "goal '" + program.goal + "' is not an intensional predicate");
    else if (g->arity != 0)
      report(-1, -1, "goal '" + program.goal + "' is not 0-ary");
  }

  auto check_terms = [&](int r, int l, const std::vector<Term>& args) {
    for (const auto& t : args)
      if (!t.is_variable() && !program.extensional.has_constant(t.name))
        report(r, l, "unknown constant '" + t.name + "'");
  };

  for (std::size_t ri = 0; ri < program.rules.size(); ++ri) {
    const auto& rule = program.rules[ri];
    const int r = static_cast<int>(ri);
    const auto* head = program.find_intensional(rule.head.predicate);
    if (!head) {
      report(r, -1, "head predicate '" + rule.head.predicate + "' is not intensional");
    } else if (static_cast<int>(rule.head.args.size()) != head->arity) {
      report(r, -1, "head '" + rule.head.predicate + "' has wrong arity");
    }
    check_terms(r, -1, rule.head.args);

    std::set<std::string> positive_vars;
    for (std::size_t li = 0; li < rule.body.size(); ++li) {
      const auto& lit = rule.body[li];
      const int l = static_cast<int>(li);
      check_terms(r, l, lit.atom.args);
      if (lit.kind == DatalogLiteral::Kind::Equal) {
        if (lit.atom.args.size() != 2) report(r, l, "equality needs two terms");
        continue;
      }
      const auto* idb = program.find_intensional(lit.atom.predicate);
      auto ext = program.extensional.relation_index(lit.atom.predicate);
      int arity = -1;
      if (idb) {
        arity = idb->arity;
        if (lit.negated) report(r, l, "negated intensional atom '" + lit.atom.predicate + "'");
      } else if (ext) {
        arity = program.extensional.relations()[*ext].arity;
      } else {
        report(r, l, "unknown predicate '" + lit.atom.predicate + "'");
      }
      if (arity >= 0 && static_cast<int>(lit.atom.args.size()) != arity)
        report(r, l, "atom '" + lit.atom.predicate + "' has wrong arity");
      if (!lit.negated)
        for (const auto& t : lit.atom.args)
          if (t.is_variable()) positive_vars.insert(t.name);
    }
    for (const auto& t : rule.head.args)
      if (t.is_variable() && !positive_vars.count(t.name))
        report(r, -1, "head variable '" + t.name + "' does not occur in a positive body atom");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

/// Set of encoded tuples: a bitmap for small universes, otherwise an
/// open-addressing hash set.
class TupleSet {
 public:
  void init(int size) {
    stride_ = static_cast<std::uint64_t>(size) + 1;
    dense_ = stride_ * stride_ <= (1ull << 24);
    if (dense_) bits_.assign((stride_ * stride_ + 63) / 64, 0);
    else slots_.assign(16, 0);
    count_ = 0;
  }
  std::uint64_t key(Element a, Element b) const {
    return static_cast<std::uint64_t>(a) * stride_ + static_cast<std::uint64_t>(b);
  }
  bool contains(std::uint64_t k) const {
    if (dense_) return (bits_[k >> 6] >> (k & 63)) & 1;
    const std::uint64_t mask = slots_.size() - 1;
    for (std::uint64_t i = mix(k) & mask;; i = (i + 1) & mask) {
      if (slots_[i] == 0) return false;
      if (slots_[i] == k + 1) return true;
    }
  }
  bool insert(std::uint64_t k) {
    if (dense_) {
      std::uint64_t& w = bits_[k >> 6];
      const std::uint64_t bit = 1ull << (k & 63);
      if (w & bit) return false;
      w |= bit;
      ++count_;
      return true;
    }
    if (2 * (count_ + 1) > slots_.size()) grow();
    if (!place(k + 1)) return false;
    ++count_;
    return true;
  }
  /// Removes everything; `keys` must list the current members.
  template <typename Keys>
  void clear(const Keys& keys) {
    if (dense_) {
      for (std::uint64_t k : keys) bits_[k >> 6] = 0;
    } else {
      std::fill(slots_.begin(), slots_.end(), 0);
    }
    count_ = 0;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    return x;
  }
  bool place(std::uint64_t stored) {
    const std::uint64_t mask = slots_.size() - 1;
    for (std::uint64_t i = mix(stored - 1) & mask;; i = (i + 1) & mask) {
      if (slots_[i] == stored) return false;
      if (slots_[i] == 0) {
        slots_[i] = stored;
        return true;
      }
    }
  }
  void grow() {
    std::vector<std::uint64_t> old;
    old.swap(slots_);
    slots_.assign(old.size() * 2, 0);
    for (std::uint64_t v : old)
      if (v) place(v);
  }

  std::uint64_t stride_ = 1;
  bool dense_ = true;
  std::vector<std::uint64_t> bits_;
  std::vector<std::uint64_t> slots_;
  std::size_t count_ = 0;
};

/// A derived table. Adjacency indexes are built on first use.
class Table {
 public:
  int arity = 0;
  std::vector<std::array<Element, 2>> tuples;

  void init(int arity_, int size) {
    arity = arity_;
    size_ = size;
    set_.init(size);
  }
  bool contains(Element a, Element b) const { return set_.contains(set_.key(a, b)); }
  bool insert(Element a, Element b) {
    if (!set_.insert(set_.key(a, b))) return false;
    tuples.push_back({a, b});
    if (indexed_) {
      out_[static_cast<std::size_t>(a)].push_back(b);
      in_[static_cast<std::size_t>(b)].push_back(a);
    }
    return true;
  }
  std::span<const Element> successors(Element a) const {
    index();
    return out_[static_cast<std::size_t>(a)];
  }
  std::span<const Element> predecessors(Element b) const {
    index();
    return in_[static_cast<std::size_t>(b)];
  }
  bool empty() const { return tuples.empty(); }
  void clear() {
    struct Keys {
      const Table* t;
      struct It {
        const Table* t;
        std::size_t i;
        std::uint64_t operator*() const { return t->set_.key(t->tuples[i][0], t->tuples[i][1]); }
        It& operator++() {
          ++i;
          return *this;
        }
        bool operator!=(const It& o) const { return i != o.i; }
      };
      It begin() const { return {t, 0}; }
      It end() const { return {t, t->tuples.size()}; }
    };
    set_.clear(Keys{this});
    if (indexed_)
      for (const auto& t : tuples) {
        out_[static_cast<std::size_t>(t[0])].clear();
        in_[static_cast<std::size_t>(t[1])].clear();
      }
    tuples.clear();
  }

 private:
  void index() const {
    if (indexed_) return;
    out_.assign(static_cast<std::size_t>(size_) + 1, {});
    in_.assign(static_cast<std::size_t>(size_) + 1, {});
    for (const auto& t : tuples) {
      out_[static_cast<std::size_t>(t[0])].push_back(t[1]);
      in_[static_cast<std::size_t>(t[1])].push_back(t[0]);
    }
    indexed_ = true;
  }

  int size_ = 0;
  TupleSet set_;
  mutable bool indexed_ = false;
  mutable std::vector<std::vector<Element>> out_, in_;
};

struct CArg {
  bool fixed = false;
  Element value = 0;
  int var = -1;
};

struct CLit {
  enum class Kind { Edb, Idb, Eq };
  Kind kind = Kind::Edb;
  bool negated = false;
  int pred = -1;
  const Relation* rel = nullptr;
  int arity = 0;
  CArg args[2];
  std::uint32_t mask = 0;
};

struct CRule {
  int head = -1;
  int head_arity = 0;
  CArg head_args[2];
  std::vector<CLit> lits;
  int vars = 0;
  bool uses_bounds = false;
  std::vector<std::vector<int>> lits_at;
  std::vector<int> ground;
  std::vector<int> idb_positive;
};

constexpr int kMaxRuleVars = 32;

class Engine {
 public:
  Engine(const DatalogProgram& program, const Structure& structure) : program_(program), structure_(structure) {
    auto bad = violations(program);
    if (!bad.empty()) throw Error("invalid Datalog program: " + bad.front().message);
    for (const auto& rel : program.extensional.relations()) {
      auto idx = structure.vocab().relation_index(rel.name);
      if (!idx || structure.vocab().relations()[*idx].arity != rel.arity)
        throw VocabularyError("structure does not interpret extensional predicate '" + rel.name + "'");
    }
    for (const auto& c : program.extensional.constants())
      if (!structure.vocab().has_constant(c))
        throw VocabularyError("structure does not interpret constant '" + c + "'");
    for (std::size_t i = 0; i < program.intensional.size(); ++i) {
      pred_index_.emplace(program.intensional[i].name, static_cast<int>(i));
      full_.emplace_back();
      full_.back().init(program.intensional[i].arity, structure.size());
    }
    delta_ = full_;
    next_ = full_;
    for (const auto& rule : program.rules) rules_.push_back(compile(rule));
  }

  /// Semi-naive evaluation of every predicate, one dependency component
  /// at a time.
  void semi_naive() {
    std::vector<int> all(full_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    for (const auto& comp : components(all)) evaluate_component(comp, -1);
  }

  /// Evaluates only what `goal` depends on. After each component the goal
  /// rules are tried against the tables so far, so a derivable goal is
  /// usually found long before the fixpoint.
  bool derive_goal(int goal) {
    std::vector<int> goal_rules;
    bool recursive = false;
    for (std::size_t r = 0; r < rules_.size(); ++r) {
      if (rules_[r].head != goal) continue;
      goal_rules.push_back(static_cast<int>(r));
      for (const auto& l : rules_[r].lits) recursive = recursive || (l.kind == CLit::Kind::Idb && l.pred == goal);
    }
    for (const auto& comp : components({goal})) {
      evaluate_component(comp, goal);
      if (!full_[static_cast<std::size_t>(goal)].empty()) return true;
      if (recursive) continue;
      for (int r : goal_rules) {
        run(rules_[static_cast<std::size_t>(r)], -1, next_);
        if (!full_[static_cast<std::size_t>(goal)].empty()) return true;
      }
    }
    return !full_[static_cast<std::size_t>(goal)].empty();
  }

  void evaluate_component(const std::vector<int>& comp, int stop) {
    std::vector<char> in(full_.size(), 0);
    for (int p : comp) {
      in[static_cast<std::size_t>(p)] = 1;
      next_[static_cast<std::size_t>(p)].clear();
      delta_[static_cast<std::size_t>(p)].clear();
    }
    std::vector<const CRule*> rules;
    for (const auto& rule : rules_)
      if (in[static_cast<std::size_t>(rule.head)]) rules.push_back(&rule);
    bool first = true;
    while (true) {
      for (const CRule* rule : rules) {
        if (first) {
          run(*rule, -1, next_);
        } else {
          for (int li : rule->idb_positive) {
            int p = rule->lits[static_cast<std::size_t>(li)].pred;
            if (in[static_cast<std::size_t>(p)] && !delta_[static_cast<std::size_t>(p)].empty()) run(*rule, li, next_);
          }
        }
        if (stop >= 0 && !full_[static_cast<std::size_t>(stop)].empty()) return;
      }
      first = false;
      bool changed = false;
      for (int p : comp) {
        auto i = static_cast<std::size_t>(p);
        changed = changed || !next_[i].empty();
        std::swap(delta_[i], next_[i]);
        next_[i].clear();
      }
      if (!changed) return;
    }
  }

  /// Strongly connected components of the dependency graph reachable from
  /// `roots`, dependencies first. Edges follow rule and literal order.
  std::vector<std::vector<int>> components(const std::vector<int>& roots) const {
    const std::size_t n = full_.size();
    std::vector<std::vector<int>> deps(n);
    for (const auto& rule : rules_)
      for (const auto& l : rule.lits)
        if (l.kind == CLit::Kind::Idb) deps[static_cast<std::size_t>(rule.head)].push_back(l.pred);
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> out;
    int counter = 0;
    std::function<void(int)> visit = [&](int v) {
      auto vi = static_cast<std::size_t>(v);
      index[vi] = low[vi] = counter++;
      stack.push_back(v);
      on_stack[vi] = 1;
      for (int w : deps[vi]) {
        auto wi = static_cast<std::size_t>(w);
        if (index[wi] < 0) {
          visit(w);
          low[vi] = std::min(low[vi], low[wi]);
        } else if (on_stack[wi]) {
          low[vi] = std::min(low[vi], index[wi]);
        }
      }
      if (low[vi] == index[vi]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp.push_back(w);
        } while (w != v);
        out.push_back(std::move(comp));
      }
    };
    for (int r : roots)
      if (index[static_cast<std::size_t>(r)] < 0) visit(r);
    return out;
  }

  void naive() {
    while (true) {
      std::vector<Table> sink(full_.size());
      for (std::size_t i = 0; i < full_.size(); ++i) sink[i].init(full_[i].arity, structure_.size());
      for (const auto& rule : rules_) run(rule, -1, sink);
      bool changed = false;
      for (const auto& t : sink) changed = changed || !t.empty();
      if (!changed) return;
    }
  }

  int index_of(const std::string& name) const { return pred_index_.at(name); }
  const Table& table(int p) const { return full_[static_cast<std::size_t>(p)]; }

  FixpointInterpretation interpretation() const {
    FixpointInterpretation fi;
    for (std::size_t i = 0; i < full_.size(); ++i) {
      auto& dst = fi.tables[program_.intensional[i].name];
      for (const auto& t : full_[i].tuples) {
        if (full_[i].arity == 0)
          dst.push_back({});
        else if (full_[i].arity == 1)
          dst.push_back({t[0]});
        else
          dst.push_back({t[0], t[1]});
      }
      std::sort(dst.begin(), dst.end());
    }
    return fi;
  }

 private:
  CRule compile(const DatalogRule& rule) {
    CRule c;
    std::unordered_map<std::string, int> var_of;
    auto arg = [&](const Term& t) {
      CArg a;
      if (t.is_variable()) {
        auto [it, inserted] = var_of.try_emplace(t.name, static_cast<int>(var_of.size()));
        a.var = it->second;
      } else {
        a.fixed = true;
        a.value = structure_.constant(t.name);
      }
      return a;
    };
    for (const auto& lit : rule.body) {
      CLit l;
      l.negated = lit.negated;
      if (lit.kind == DatalogLiteral::Kind::Equal) {
        l.kind = CLit::Kind::Eq;
        l.arity = 2;
        if (!l.negated) c.uses_bounds = true;
      } else if (auto it = pred_index_.find(lit.atom.predicate); it != pred_index_.end()) {
        l.kind = CLit::Kind::Idb;
        l.pred = it->second;
        l.arity = static_cast<int>(lit.atom.args.size());
      } else {
        l.kind = CLit::Kind::Edb;
        l.rel = &structure_.relation(lit.atom.predicate);
        l.arity = static_cast<int>(lit.atom.args.size());
        if (l.rel->is_natural_order()) c.uses_bounds = true;
      }
      for (int i = 0; i < l.arity; ++i) {
        l.args[i] = arg(lit.atom.args[static_cast<std::size_t>(i)]);
        if (!l.args[i].fixed) l.mask |= 1u << l.args[i].var;
      }
      c.lits.push_back(l);
    }
    c.head = pred_index_.at(rule.head.predicate);
    c.head_arity = static_cast<int>(rule.head.args.size());
    for (int i = 0; i < c.head_arity; ++i) c.head_args[i] = arg(rule.head.args[static_cast<std::size_t>(i)]);
    c.vars = static_cast<int>(var_of.size());
    if (c.vars > kMaxRuleVars) throw Error("rule has more than 32 variables");
    c.lits_at.resize(static_cast<std::size_t>(c.vars));
    for (std::size_t i = 0; i < c.lits.size(); ++i) {
      const auto& l = c.lits[i];
      if (l.mask == 0) c.ground.push_back(static_cast<int>(i));
      for (int v = 0; v < c.vars; ++v)
        if (l.mask & (1u << v)) c.lits_at[static_cast<std::size_t>(v)].push_back(static_cast<int>(i));
      if (l.kind == CLit::Kind::Idb && !l.negated) c.idb_positive.push_back(static_cast<int>(i));
    }
    return c;
  }

  struct RunState {
    const CRule* rule;
    int delta_lit;
    std::vector<Table>* sink;
    Element vals[kMaxRuleVars];
    std::vector<std::array<Element, 2>> derived;
  };

  const Table& source(const RunState& s, int li) const {
    const auto& l = s.rule->lits[static_cast<std::size_t>(li)];
    return li == s.delta_lit ? delta_[static_cast<std::size_t>(l.pred)] : full_[static_cast<std::size_t>(l.pred)];
  }

  static Element value(const CArg& a, const RunState& s) { return a.fixed ? a.value : s.vals[a.var]; }

  bool holds(const RunState& s, int li) const {
    const auto& l = s.rule->lits[static_cast<std::size_t>(li)];
    bool r = false;
    switch (l.kind) {
      case CLit::Kind::Eq: r = value(l.args[0], s) == value(l.args[1], s); break;
      case CLit::Kind::Edb:
        r = l.arity == 1 ? l.rel->contains(value(l.args[0], s))
                         : l.rel->contains(value(l.args[0], s), value(l.args[1], s));
        break;
      case CLit::Kind::Idb: {
        const Table& t = source(s, li);
        if (l.arity == 0)
          r = !t.empty();
        else if (l.arity == 1)
          r = t.contains(value(l.args[0], s), 0);
        else
          r = t.contains(value(l.args[0], s), value(l.args[1], s));
        break;
      }
    }
    return r != l.negated;
  }

  void run(const CRule& rule, int delta_lit, std::vector<Table>& sink) {
    RunState s{&rule, delta_lit, &sink, {}, {}};
    for (int v = 0; v < kMaxRuleVars; ++v) s.vals[v] = 0;
    bool ok = true;
    for (int li : rule.ground)
      if (!holds(s, li)) {
        ok = false;
        break;
      }
    if (ok) search(s, 0);
    Table& head = full_[static_cast<std::size_t>(rule.head)];
    Table& out = sink[static_cast<std::size_t>(rule.head)];
    for (const auto& t : s.derived)
      if (head.insert(t[0], t[1])) out.insert(t[0], t[1]);
  }

  bool newly_ok(const RunState& s, std::uint32_t bound, int v) const {
    for (int li : s.rule->lits_at[static_cast<std::size_t>(v)])
      if ((s.rule->lits[static_cast<std::size_t>(li)].mask & ~bound) == 0 && !holds(s, li)) return false;
    return true;
  }

  static std::span<const Element> clip(std::span<const Element> sp, std::int64_t lo, std::int64_t hi) {
    auto first = std::lower_bound(sp.begin(), sp.end(), lo);
    auto last = std::upper_bound(first, sp.end(), hi);
    return sp.subspan(static_cast<std::size_t>(first - sp.begin()), static_cast<std::size_t>(last - first));
  }

  void search(RunState& s, std::uint32_t bound) {
    const CRule& r = *s.rule;
    const std::uint32_t full = r.vars == 32 ? ~0u : ((1u << r.vars) - 1);
    if (bound == full) {
      std::array<Element, 2> t{0, 0};
      for (int i = 0; i < r.head_arity; ++i) t[static_cast<std::size_t>(i)] = value(r.head_args[i], s);
      if (!full_[static_cast<std::size_t>(r.head)].contains(t[0], t[1])) s.derived.push_back(t);
      return;
    }
    const std::int64_t size = structure_.size();
    std::int64_t lo[kMaxRuleVars], hi[kMaxRuleVars];
    for (int v = 0; v < r.vars; ++v) {
      lo[v] = 1;
      hi[v] = size;
    }
    if (r.uses_bounds) {
      detail::DifferenceBounds db(r.vars);
      for (int v = 0; v < r.vars; ++v) {
        if (bound & (1u << v)) continue;
        db.add(0, v + 1, size);
        db.add(v + 1, 0, -1);
      }
      for (const auto& l : r.lits) {
        if ((l.mask & ~bound) == 0) continue;
        bool eq = l.kind == CLit::Kind::Eq;
        if (eq ? l.negated : !(l.kind == CLit::Kind::Edb && l.rel->is_natural_order())) continue;
        int node[2];
        std::int64_t off[2];
        for (int i = 0; i < 2; ++i) {
          if (!l.args[i].fixed && !(bound & (1u << l.args[i].var))) {
            node[i] = l.args[i].var + 1;
            off[i] = 0;
          } else {
            node[i] = 0;
            off[i] = value(l.args[i], s);
          }
        }
        auto add = [&](int i, int j, std::int64_t c) { db.add(node[i], node[j], c - off[j] + off[i]); };
        if (eq) {
          add(0, 1, 0);
          add(1, 0, 0);
        } else if (!l.negated) {
          add(1, 0, 0);
        } else {
          add(0, 1, -1);
        }
      }
      if (!db.close()) return;
      for (int v = 0; v < r.vars; ++v) {
        if (bound & (1u << v)) continue;
        lo[v] = std::max<std::int64_t>(1, db.lower(v + 1));
        hi[v] = std::min<std::int64_t>(size, db.upper(v + 1));
        if (lo[v] > hi[v]) return;
      }
    }

    // Generators: a single variable from an interval or a list, or both
    // variables of a binary atom from its tuples.
    enum class Gen { Interval, List, Pairs, EdbPairs };
    Gen gen = Gen::Interval;
    int gv = -1, glit = -1;
    bool list_sorted = false;
    std::span<const Element> list;
    std::int64_t best = INT64_MAX;

    for (int v = 0; v < r.vars; ++v)
      if (!(bound & (1u << v)) && hi[v] - lo[v] + 1 < best) {
        best = hi[v] - lo[v] + 1;
        gen = Gen::Interval;
        gv = v;
      }
    auto offer_list = [&](int v, std::span<const Element> sp, bool sorted) {
      if (sorted) sp = clip(sp, lo[v], hi[v]);
      if (static_cast<std::int64_t>(sp.size()) < best) {
        best = static_cast<std::int64_t>(sp.size());
        gen = Gen::List;
        gv = v;
        list = sp;
        list_sorted = sorted;
      }
    };
    for (std::size_t li = 0; li < r.lits.size(); ++li) {
      const auto& l = r.lits[li];
      if (l.negated || l.kind == CLit::Kind::Eq || (l.mask & ~bound) == 0 || l.arity == 0) continue;
      if (l.kind == CLit::Kind::Edb && l.rel->is_natural_order()) continue;
      auto unbound = [&](int i) { return !l.args[i].fixed && !(bound & (1u << l.args[i].var)); };
      if (l.kind == CLit::Kind::Edb) {
        if (l.arity == 1) {
          offer_list(l.args[0].var, l.rel->members(), true);
          continue;
        }
        bool u0 = unbound(0), u1 = unbound(1);
        if (u0 && u1) {
          if (l.args[0].var == l.args[1].var) {
            offer_list(l.args[0].var, l.rel->loops(), true);
          } else if (static_cast<std::int64_t>(l.rel->cardinality()) < best) {
            best = static_cast<std::int64_t>(l.rel->cardinality());
            gen = Gen::EdbPairs;
            glit = static_cast<int>(li);
          }
        } else if (u0) {
          offer_list(l.args[0].var, l.rel->predecessors(value(l.args[1], s)), true);
        } else {
          offer_list(l.args[1].var, l.rel->successors(value(l.args[0], s)), true);
        }
      } else {
        const Table& t = source(s, static_cast<int>(li));
        if (l.arity == 1 || (unbound(0) && unbound(1))) {
          if (static_cast<std::int64_t>(t.tuples.size()) < best) {
            best = static_cast<std::int64_t>(t.tuples.size());
            gen = Gen::Pairs;
            glit = static_cast<int>(li);
          }
        } else if (unbound(0)) {
          offer_list(l.args[0].var, t.predecessors(value(l.args[1], s)), false);
        } else {
          offer_list(l.args[1].var, t.successors(value(l.args[0], s)), false);
        }
      }
    }
    if (best <= 0) return;

    auto in_range = [&](int v, Element e) { return e >= lo[v] && e <= hi[v]; };
    auto bind_one = [&](int v, Element e) {
      s.vals[v] = e;
      std::uint32_t nb = bound | (1u << v);
      if (newly_ok(s, nb, v)) search(s, nb);
    };
    // Binds the unbound arguments of literal l to (a, b).
    auto bind_tuple = [&](const CLit& l, Element a, Element b) {
      Element t[2] = {a, b};
      std::uint32_t nb = bound;
      for (int i = 0; i < l.arity; ++i) {
        if (l.args[i].fixed || (bound & (1u << l.args[i].var))) {
          if (value(l.args[i], s) != t[i]) return;
          continue;
        }
        int v = l.args[i].var;
        if (nb & (1u << v)) {
          if (s.vals[v] != t[i]) return;
          continue;
        }
        if (!in_range(v, t[i])) return;
        s.vals[v] = t[i];
        nb |= 1u << v;
      }
      for (int i = 0; i < l.arity; ++i)
        if (!l.args[i].fixed && !(bound & (1u << l.args[i].var)) && !newly_ok(s, nb, l.args[i].var)) return;
      search(s, nb);
    };

    switch (gen) {
      case Gen::Interval:
        for (std::int64_t e = lo[gv]; e <= hi[gv]; ++e) bind_one(gv, static_cast<Element>(e));
        break;
      case Gen::List:
        for (Element e : list)
          if (list_sorted || in_range(gv, e)) bind_one(gv, e);
        break;
      case Gen::Pairs: {
        const auto& l = r.lits[static_cast<std::size_t>(glit)];
        const Table& t = source(s, glit);
        // Iterate by index; the table does not change during a run.
        for (std::size_t i = 0; i < t.tuples.size(); ++i) bind_tuple(l, t.tuples[i][0], t.tuples[i][1]);
        break;
      }
      case Gen::EdbPairs: {
        const auto& l = r.lits[static_cast<std::size_t>(glit)];
        for (Element a : clip(l.rel->sources(), lo[l.args[0].var], hi[l.args[0].var]))
          for (Element b : clip(l.rel->successors(a), lo[l.args[1].var], hi[l.args[1].var])) bind_tuple(l, a, b);
        break;
      }
    }
    for (int v = 0; v < r.vars; ++v)
      if (!(bound & (1u << v))) s.vals[v] = 0;
  }

  const DatalogProgram& program_;
  const Structure& structure_;
  std::unordered_map<std::string, int> pred_index_;
  std::vector<Table> full_;
  std::vector<Table> delta_;
  std::vector<Table> next_;
  std::vector<CRule> rules_;
};

}  // namespace

FixpointInterpretation eval_fixpoint(const DatalogProgram& program, const Structure& structure) {
  Engine e(program, structure);
  e.semi_naive();
  return e.interpretation();
}

FixpointInterpretation eval_fixpoint_naive(const DatalogProgram& program, const Structure& structure) {
  Engine e(program, structure);
  e.naive();
  return e.interpretation();
}

bool goal_holds(const DatalogProgram& program, const Structure& structure) {
  const auto* g = program.find_intensional(program.goal);
  if (program.goal.empty() || !g) throw Error("program has no goal predicate");
  if (g->arity != 0) throw Error("goal '" + program.goal + "' is not 0-ary");
  Engine e(program, structure);
  int goal = e.index_of(program.goal);
  return e.derive_goal(goal);
}

// ---------------------------------------------------------------------------
// Text format

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

class RuleParser {
 public:
  RuleParser(std::string_view text, int line, const std::set<std::string>& constants)
      : s_(text), line_(line), constants_(constants) {}

  DatalogRule rule() {
    DatalogRule r;
    r.head = atom(ident());
    skip();
    if (eat(":-")) {
      do r.body.push_back(literal());
      while (eat(","));
    }
    eat(".");
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_, 1)) + "'");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  std::string ident() {
    skip();
    if (pos_ >= s_.size() || !ident_start(s_[pos_])) fail("expected identifier");
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }
  Term term(const std::string& name) const {
    return constants_.count(name) ? Term::constant(name) : Term::var(name);
  }
  DatalogAtom atom(std::string name) {
    DatalogAtom a{std::move(name), {}};
    if (eat("(")) {
      if (!eat(")")) {
        do a.args.push_back(term(ident()));
        while (eat(","));
        if (!eat(")")) fail("expected ')'");
      }
    }
    return a;
  }
  DatalogLiteral literal() {
    bool negated = false;
    skip();
    std::string first = ident();
    if (first == "not") {
      skip();
      if (pos_ < s_.size() && ident_start(s_[pos_])) {
        negated = true;
        first = ident();
      }
    }
    skip();
    if (eat("<=")) {
      Term rhs = term(ident());
      DatalogLiteral l = DatalogLiteral::positive(std::string(kOrderSymbol), {term(first), rhs});
      l.negated = negated;
      return l;
    }
    if (eat("!=")) return DatalogLiteral::equal(term(first), term(ident()), !negated);
    if (eat("=")) return DatalogLiteral::equal(term(first), term(ident()), negated);
    DatalogLiteral l;
    l.atom = atom(first);
    l.negated = negated;
    return l;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
  const std::set<std::string>& constants_;
};

std::pair<std::string, int> symbol_decl(std::string_view arg, int line) {
  auto slash = arg.rfind('/');
  if (slash == std::string_view::npos || slash == 0) throw ParseError(line, "expected Name/arity");
  std::string name(arg.substr(0, slash));
  int arity = 0;
  try {
    arity = std::stoi(std::string(arg.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ParseError(line, "bad arity in '" + std::string(arg) + "'");
  }
  return {name, arity};
}

std::string term_text(const Term& t) { return t.name; }

std::string literal_text(const DatalogLiteral& l) {
  std::string out;
  if (l.kind == DatalogLiteral::Kind::Equal)
    return term_text(l.atom.args.at(0)) + (l.negated ? " != " : " = ") + term_text(l.atom.args.at(1));
  if (l.negated) out += "not ";
  if (l.atom.predicate == kOrderSymbol && l.atom.args.size() == 2)
    return out + term_text(l.atom.args[0]) + " <= " + term_text(l.atom.args[1]);
  out += l.atom.predicate;
  if (!l.atom.args.empty()) {
    out += "(";
    for (std::size_t i = 0; i < l.atom.args.size(); ++i) out += (i ? ", " : "") + term_text(l.atom.args[i]);
    out += ")";
  }
  return out;
}

}  // namespace

DatalogProgram parse_program(std::string_view text) {
  struct Line {
    int number;
    std::string content;
  };
  std::vector<Line> lines;
  {
    std::istringstream in{std::string(text)};
    std::string raw;
    int n = 0;
    while (std::getline(in, raw)) {
      ++n;
      if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
      auto b = raw.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      auto e = raw.find_last_not_of(" \t\r");
      lines.push_back({n, raw.substr(b, e - b + 1)});
    }
  }

  std::vector<RelationSymbol> ext_rel;
  std::vector<std::string> ext_const;
  DatalogProgram p;
  for (const auto& l : lines) {
    if (l.content[0] != '.') continue;
    std::istringstream words(l.content);
    std::string directive, arg, extra;
    words >> directive >> arg;
    if (arg.empty() || (words >> extra)) throw ParseError(l.number, "malformed directive");
    if (directive == ".extensional") {
      auto [name, arity] = symbol_decl(arg, l.number);
      ext_rel.push_back({name, arity});
    } else if (directive == ".intensional") {
      auto [name, arity] = symbol_decl(arg, l.number);
      p.intensional.push_back({name, arity});
    } else if (directive == ".constant") {
      ext_const.push_back(arg);
    } else if (directive == ".goal") {
      if (!p.goal.empty()) throw ParseError(l.number, "goal declared twice");
      p.goal = arg;
    } else {
      throw ParseError(l.number, "unknown directive '" + directive + "'");
    }
  }
  try {
    p.extensional = Vocabulary(ext_rel, ext_const);
  } catch (const Error& e) {
    throw ParseError(lines.empty() ? 1 : lines.front().number, e.what());
  }
  std::set<std::string> constants(ext_const.begin(), ext_const.end());
  for (const auto& l : lines) {
    if (l.content[0] == '.') continue;
    p.rules.push_back(RuleParser(l.content, l.number, constants).rule());
  }
  return p;
}

std::string to_string(const DatalogRule& rule) {
  std::string out;
  DatalogLiteral head;
  head.atom = rule.head;
  out += literal_text(head);
  if (!rule.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < rule.body.size(); ++i) out += (i ? ", " : "") + literal_text(rule.body[i]);
  }
  return out;
}

std::string to_string(const DatalogProgram& program) {
  std::string out;
  for (const auto& r : program.extensional.relations())
    out += ".extensional " + r.name + "/" + std::to_string(r.arity) + "\n";
  for (const auto& c : program.extensional.constants()) out += ".constant " + c + "\n";
  for (const auto& r : program.intensional) out += ".intensional " + r.name + "/" + std::to_string(r.arity) + "\n";
  if (!program.goal.empty()) out += ".goal " + program.goal + "\n";
  for (const auto& r : program.rules) out += to_string(r) + "\n";
  return out;
}

// ---------------------------------------------------------------------------

ExtensionSampleReport check_extension_closed_sample(const DatalogProgram& program, const Structure& structure,
                                                    int trials, std::uint64_t seed) {
  ExtensionSampleReport report;
  if (trials <= 0) return report;
  if (!goal_holds(program, structure)) throw Error("extension sampling needs a structure satisfying the goal");
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    Extension ext = random_extension(structure, rng);
    ++report.trials;
    if (goal_holds(program, ext.structure)) continue;
    ++report.failures;
    std::string added;
    std::vector<char> old(static_cast<std::size_t>(ext.structure.size()) + 1, 0);
    for (std::size_t a = 1; a < ext.embedding.size(); ++a) old[static_cast<std::size_t>(ext.embedding[a])] = 1;
    for (Element e = 1; e <= ext.structure.size(); ++e)
      if (!old[static_cast<std::size_t>(e)]) added += (added.empty() ? "" : ",") + std::to_string(e);
    report.counterexamples.push_back("trial " + std::to_string(t) + ": goal lost after adding elements {" + added +
                                     "}");
  }
  return report;
}

}  // namespace extclosed
