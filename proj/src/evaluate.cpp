#include "extclosed/evaluate.hpp"

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>

#include "difference_bounds.hpp"
#include "extclosed/errors.hpp"

namespace extclosed {

namespace {

constexpr int kMaxBlockVars = 32;

struct Arg {
  bool fixed = false;
  Element value = 0;
  int slot = -1;
};

enum class Op { True, False, Atom, Equal, Not, And, Or, Implies, Block };

struct Node {
  Op op = Op::True;
  const Relation* rel = nullptr;
  int arity = 0;
  Arg args[2];
  std::vector<int> kids;
  int block = -1;
};

struct Literal {
  int node = -1;
  bool negated = false;
  std::uint32_t mask = 0;
  // Block position of each argument, or -1 when it is not a block variable.
  int pos[2] = {-1, -1};
};

struct Complex {
  int node = -1;
  bool negated = false;
  std::uint32_t mask = 0;
};

struct Block {
  bool existential = true;
  std::vector<int> slots;
  std::vector<Literal> literals;
  std::vector<Complex> complex;
  // Per position: literals / complex conjuncts mentioning it.
  std::vector<std::vector<int>> literals_at;
  std::vector<std::vector<int>> complex_at;
  std::vector<int> ground_literals;
  std::vector<int> ground_complex;
  bool uses_bounds = false;
};

}  // namespace

struct FormulaEvaluator::Plan {
  const Structure* structure = nullptr;
  Structure owned;
  std::vector<Node> nodes;
  std::vector<Block> blocks;
  std::unordered_map<std::string, int> slot_of;
  std::vector<std::pair<std::string, int>> free_slots;
  int root = -1;
  int slot_count = 0;
  std::unordered_map<const void*, int> memo;
  std::unordered_map<const void*, std::set<std::string>> free_memo;

  explicit Plan(const Structure& s) : owned(s) { structure = &owned; }

  int slot(const std::string& name) {
    auto [it, inserted] = slot_of.try_emplace(name, slot_count);
    if (inserted) ++slot_count;
    return it->second;
  }

  const std::set<std::string>& free_of(const Formula& f) {
    auto it = free_memo.find(f.id());
    if (it != free_memo.end()) return it->second;
    return free_memo.emplace(f.id(), free_variables(f)).first->second;
  }

  Arg arg_of(const Term& t) {
    Arg a;
    if (t.is_variable()) {
      a.slot = slot(t.name);
    } else {
      a.fixed = true;
      a.value = structure->constant(t.name);
    }
    return a;
  }

  int compile(const Formula& f) {
    auto it = memo.find(f.id());
    if (it != memo.end()) return it->second;
    Node n;
    switch (f.kind()) {
      case FormulaKind::True: n.op = Op::True; break;
      case FormulaKind::False: n.op = Op::False; break;
      case FormulaKind::Atom: {
        n.op = Op::Atom;
        n.rel = &structure->relation(f.relation());
        n.arity = static_cast<int>(f.terms().size());
        for (int i = 0; i < n.arity; ++i) n.args[i] = arg_of(f.terms()[i]);
        break;
      }
      case FormulaKind::Equal:
        n.op = Op::Equal;
        n.arity = 2;
        n.args[0] = arg_of(f.terms()[0]);
        n.args[1] = arg_of(f.terms()[1]);
        break;
      case FormulaKind::Not:
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies:
        n.op = f.kind() == FormulaKind::Not   ? Op::Not
               : f.kind() == FormulaKind::And ? Op::And
               : f.kind() == FormulaKind::Or  ? Op::Or
                                              : Op::Implies;
        for (const auto& c : f.children()) n.kids.push_back(compile(c));
        break;
      case FormulaKind::Exists:
      case FormulaKind::Forall:
        n.op = Op::Block;
        n.block = compile_block(f);
        break;
    }
    nodes.push_back(std::move(n));
    int idx = static_cast<int>(nodes.size()) - 1;
    memo.emplace(f.id(), idx);
    return idx;
  }

  int compile_block(const Formula& f) {
    Block b;
    b.existential = f.kind() == FormulaKind::Exists;
    std::vector<std::string> names;
    Formula body = f;
    while (body.kind() == f.kind() && static_cast<int>(names.size()) < kMaxBlockVars &&
           std::find(names.begin(), names.end(), body.variable()) == names.end()) {
      names.push_back(body.variable());
      body = body.child();
    }
    for (const auto& v : names) b.slots.push_back(slot(v));

    auto position = [&](const Arg& a) -> int {
      if (a.fixed) return -1;
      for (std::size_t p = 0; p < b.slots.size(); ++p)
        if (b.slots[p] == a.slot) return static_cast<int>(p);
      return -1;
    };

    // Existential blocks need a witness of the body, universal blocks a
    // witness of its negation.
    std::vector<std::pair<Formula, bool>> parts;
    collect(body, b.existential, parts);
    for (const auto& [g, positive] : parts) {
      if (g.is_literal_atom()) {
        int node = compile(g);
        Literal lit;
        lit.node = node;
        lit.negated = !positive;
        const Node& n = nodes[node];
        for (int i = 0; i < n.arity; ++i) {
          lit.pos[i] = position(n.args[i]);
          if (lit.pos[i] >= 0) lit.mask |= 1u << lit.pos[i];
        }
        if (n.op == Op::Equal ? positive : (n.rel->is_natural_order())) b.uses_bounds = true;
        b.literals.push_back(lit);
      } else {
        Complex c;
        c.node = compile(g);
        c.negated = !positive;
        const auto& fv = free_of(g);
        for (std::size_t p = 0; p < names.size(); ++p)
          if (fv.count(names[p])) c.mask |= 1u << p;
        b.complex.push_back(c);
      }
    }
    b.literals_at.resize(names.size());
    b.complex_at.resize(names.size());
    for (std::size_t i = 0; i < b.literals.size(); ++i) {
      if (b.literals[i].mask == 0) b.ground_literals.push_back(static_cast<int>(i));
      for (std::size_t p = 0; p < names.size(); ++p)
        if (b.literals[i].mask & (1u << p)) b.literals_at[p].push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < b.complex.size(); ++i) {
      if (b.complex[i].mask == 0) b.ground_complex.push_back(static_cast<int>(i));
      for (std::size_t p = 0; p < names.size(); ++p)
        if (b.complex[i].mask & (1u << p)) b.complex_at[p].push_back(static_cast<int>(i));
    }
    blocks.push_back(std::move(b));
    return static_cast<int>(blocks.size()) - 1;
  }

  // Flattens f (read with the given polarity) into conjuncts.
  static void collect(const Formula& f, bool positive, std::vector<std::pair<Formula, bool>>& out) {
    switch (f.kind()) {
      case FormulaKind::True:
        if (positive) return;
        break;
      case FormulaKind::False:
        if (!positive) return;
        break;
      case FormulaKind::Not:
        collect(f.child(), !positive, out);
        return;
      case FormulaKind::And:
        if (positive) {
          for (const auto& c : f.children()) collect(c, true, out);
          return;
        }
        break;
      case FormulaKind::Or:
        if (!positive) {
          for (const auto& c : f.children()) collect(c, false, out);
          return;
        }
        break;
      case FormulaKind::Implies:
        if (!positive) {
          collect(f.child(0), true, out);
          collect(f.child(1), false, out);
          return;
        }
        break;
      default:
        break;
    }
    out.emplace_back(f, positive);
  }

  // ---- evaluation ----

  static Element value(const Arg& a, const std::vector<Element>& val) { return a.fixed ? a.value : val[a.slot]; }

  bool atom(const Node& n, const std::vector<Element>& val) const {
    if (n.op == Op::Equal) return value(n.args[0], val) == value(n.args[1], val);
    if (n.arity == 1) return n.rel->contains(value(n.args[0], val));
    return n.rel->contains(value(n.args[0], val), value(n.args[1], val));
  }

  bool eval(int idx, std::vector<Element>& val) const {
    const Node& n = nodes[idx];
    switch (n.op) {
      case Op::True: return true;
      case Op::False: return false;
      case Op::Atom:
      case Op::Equal: return atom(n, val);
      case Op::Not: return !eval(n.kids[0], val);
      case Op::And:
        for (int k : n.kids)
          if (!eval(k, val)) return false;
        return true;
      case Op::Or:
        for (int k : n.kids)
          if (eval(k, val)) return true;
        return false;
      case Op::Implies: return !eval(n.kids[0], val) || eval(n.kids[1], val);
      case Op::Block: return run_block(blocks[n.block], val);
    }
    return false;
  }

  bool literal_holds(const Literal& l, const std::vector<Element>& val) const {
    return atom(nodes[l.node], val) != l.negated;
  }
  bool complex_holds(const Complex& c, std::vector<Element>& val) const { return eval(c.node, val) != c.negated; }

  bool run_block(const Block& b, std::vector<Element>& val) const {
    std::vector<Element> saved(b.slots.size());
    for (std::size_t p = 0; p < b.slots.size(); ++p) {
      saved[p] = val[b.slots[p]];
      val[b.slots[p]] = 0;
    }
    bool found = ground_ok(b, val) && search(b, 0, val);
    for (std::size_t p = 0; p < b.slots.size(); ++p) val[b.slots[p]] = saved[p];
    return b.existential ? found : !found;
  }

  bool ground_ok(const Block& b, std::vector<Element>& val) const {
    for (int i : b.ground_literals)
      if (!literal_holds(b.literals[i], val)) return false;
    for (int i : b.ground_complex)
      if (!complex_holds(b.complex[i], val)) return false;
    return true;
  }

  // Checks every conjunct that became fully bound when position p was bound.
  bool newly_bound_ok(const Block& b, std::uint32_t bound, int p, std::vector<Element>& val) const {
    for (int i : b.literals_at[p])
      if ((b.literals[i].mask & ~bound) == 0 && !literal_holds(b.literals[i], val)) return false;
    for (int i : b.complex_at[p])
      if ((b.complex[i].mask & ~bound) == 0 && !complex_holds(b.complex[i], val)) return false;
    return true;
  }

  struct Choice {
    int position = -1;
    std::int64_t lo = 1, hi = 0;
    std::span<const Element> list;
    bool use_list = false;
    std::int64_t cost = 0;
  };

  static std::span<const Element> clip(std::span<const Element> s, std::int64_t lo, std::int64_t hi) {
    auto first = std::lower_bound(s.begin(), s.end(), lo);
    auto last = std::upper_bound(first, s.end(), hi);
    return s.subspan(static_cast<std::size_t>(first - s.begin()), static_cast<std::size_t>(last - first));
  }

  bool search(const Block& b, std::uint32_t bound, std::vector<Element>& val) const {
    const int k = static_cast<int>(b.slots.size());
    const std::uint32_t full = k == 32 ? ~0u : ((1u << k) - 1);
    if (bound == full) return true;
    const std::int64_t size = structure->size();

    std::int64_t lo[kMaxBlockVars], hi[kMaxBlockVars];
    for (int p = 0; p < k; ++p) {
      lo[p] = 1;
      hi[p] = size;
    }
    if (b.uses_bounds) {
      detail::DifferenceBounds db(k);
      for (int p = 0; p < k; ++p) {
        if (bound & (1u << p)) continue;
        db.add(0, p + 1, size);
        db.add(p + 1, 0, -1);
      }
      for (const auto& l : b.literals) {
        if ((l.mask & ~bound) == 0) continue;
        const Node& n = nodes[l.node];
        bool eq = n.op == Op::Equal;
        if (eq ? l.negated : !n.rel->is_natural_order()) continue;
        int node[2];
        std::int64_t off[2];
        for (int i = 0; i < 2; ++i) {
          if (l.pos[i] >= 0 && !(bound & (1u << l.pos[i]))) {
            node[i] = l.pos[i] + 1;
            off[i] = 0;
          } else {
            node[i] = 0;
            off[i] = value(n.args[i], val);
          }
        }
        // x_j + off_j - (x_i + off_i) <= c
        auto add = [&](int i, int j, std::int64_t c) { db.add(node[i], node[j], c - off[j] + off[i]); };
        if (eq) {
          add(0, 1, 0);
          add(1, 0, 0);
        } else if (!l.negated) {
          add(1, 0, 0);  // a - b <= 0
        } else {
          add(0, 1, -1);  // b - a <= -1
        }
      }
      if (!db.close()) return false;
      for (int p = 0; p < k; ++p) {
        if (bound & (1u << p)) continue;
        lo[p] = std::max<std::int64_t>(1, db.lower(p + 1));
        hi[p] = std::min<std::int64_t>(size, db.upper(p + 1));
        if (lo[p] > hi[p]) return false;
      }
    }

    Choice best;
    best.cost = INT64_MAX;
    auto consider_interval = [&](int p) {
      std::int64_t c = hi[p] - lo[p] + 1;
      if (c < best.cost) best = Choice{p, lo[p], hi[p], {}, false, c};
    };
    auto consider_list = [&](int p, std::span<const Element> s) {
      if (static_cast<std::int64_t>(s.size()) >= best.cost) return;
      auto c = clip(s, lo[p], hi[p]);
      if (static_cast<std::int64_t>(c.size()) < best.cost)
        best = Choice{p, lo[p], hi[p], c, true, static_cast<std::int64_t>(c.size())};
    };
    for (int p = 0; p < k; ++p)
      if (!(bound & (1u << p))) consider_interval(p);
    for (const auto& l : b.literals) {
      if (l.negated || (l.mask & ~bound) == 0) continue;
      const Node& n = nodes[l.node];
      if (n.op != Op::Atom || n.rel->is_natural_order()) continue;
      auto unbound = [&](int i) { return l.pos[i] >= 0 && !(bound & (1u << l.pos[i])); };
      if (n.arity == 1) {
        consider_list(l.pos[0], n.rel->members());
        continue;
      }
      bool u0 = unbound(0), u1 = unbound(1);
      if (u0 && u1) {
        if (l.pos[0] == l.pos[1]) {
          consider_list(l.pos[0], n.rel->loops());
        } else {
          consider_list(l.pos[0], n.rel->sources());
          consider_list(l.pos[1], n.rel->targets());
        }
      } else if (u0) {
        consider_list(l.pos[0], n.rel->predecessors(value(n.args[1], val)));
      } else if (u1) {
        consider_list(l.pos[1], n.rel->successors(value(n.args[0], val)));
      }
    }
    if (best.cost <= 0) return false;

    const int p = best.position;
    const int slot = b.slots[p];
    const std::uint32_t next = bound | (1u << p);
    bool found = false;
    auto try_value = [&](Element e) {
      val[slot] = e;
      return newly_bound_ok(b, next, p, val) && search(b, next, val);
    };
    if (best.use_list) {
      for (Element e : best.list)
        if (try_value(e)) {
          found = true;
          break;
        }
    } else {
      for (std::int64_t e = best.lo; e <= best.hi; ++e)
        if (try_value(static_cast<Element>(e))) {
          found = true;
          break;
        }
    }
    if (!found) val[slot] = 0;
    return found;
  }
};

FormulaEvaluator::FormulaEvaluator(const Structure& structure, const Formula& formula)
    : plan_(std::make_unique<Plan>(structure)) {
  check_vocabulary(formula, structure.vocab());
  for (const auto& v : free_variables(formula)) plan_->free_slots.emplace_back(v, plan_->slot(v));
  plan_->root = plan_->compile(formula);
  plan_->memo.clear();
  plan_->free_memo.clear();
}

FormulaEvaluator::~FormulaEvaluator() = default;
FormulaEvaluator::FormulaEvaluator(FormulaEvaluator&&) noexcept = default;
FormulaEvaluator& FormulaEvaluator::operator=(FormulaEvaluator&&) noexcept = default;

bool FormulaEvaluator::evaluate(const Assignment& env) const {
  std::vector<Element> val(static_cast<std::size_t>(plan_->slot_count), 0);
  for (const auto& [name, slot] : plan_->free_slots) {
    auto it = env.find(name);
    if (it == env.end()) throw EvaluationError("unassigned free variable '" + name + "'");
    if (it->second < 1 || it->second > plan_->structure->size())
      throw EvaluationError("variable '" + name + "' assigned an element outside the universe");
    val[slot] = it->second;
  }
  return plan_->eval(plan_->root, val);
}

bool evaluate(const Structure& structure, const Formula& formula, const Assignment& env) {
  return FormulaEvaluator(structure, formula).evaluate(env);
}

}  // namespace extclosed
