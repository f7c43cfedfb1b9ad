#include "extclosed/formula.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <functional>
#include <sstream>

#include "extclosed/errors.hpp"

namespace extclosed {

struct FormulaNode {
  FormulaKind kind;
  std::string name;  // relation (Atom) or bound variable (quantifiers)
  std::vector<Term> terms;
  std::vector<Formula> children;
};

namespace {

const std::string kEmpty;
const std::vector<Term> kNoTerms;
const std::vector<Formula> kNoChildren;

}  // namespace

// ---------------------------------------------------------------------------
// Construction and access

Formula Formula::truth() { return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::True, {}, {}, {}})); }
Formula Formula::falsity() {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::False, {}, {}, {}}));
}

Formula Formula::atom(std::string relation, std::vector<Term> args) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::Atom, std::move(relation), std::move(args), {}}));
}

Formula Formula::equal(Term lhs, Term rhs) {
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{FormulaKind::Equal, {}, {std::move(lhs), std::move(rhs)}, {}}));
}

Formula Formula::le(Term lhs, Term rhs) { return atom(std::string(kOrderSymbol), {std::move(lhs), std::move(rhs)}); }

Formula Formula::lt(Term lhs, Term rhs) { return conjunction({le(lhs, rhs), negation(equal(lhs, rhs))}); }

Formula Formula::negation(Formula f) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::Not, {}, {}, {std::move(f)}}));
}

Formula Formula::conjunction(std::vector<Formula> parts) {
  if (parts.empty()) return truth();
  if (parts.size() == 1) return parts.front();
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::And, {}, {}, std::move(parts)}));
}

Formula Formula::disjunction(std::vector<Formula> parts) {
  if (parts.empty()) return falsity();
  if (parts.size() == 1) return parts.front();
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::Or, {}, {}, std::move(parts)}));
}

Formula Formula::implication(Formula lhs, Formula rhs) {
  return Formula(std::make_shared<const FormulaNode>(
      FormulaNode{FormulaKind::Implies, {}, {}, {std::move(lhs), std::move(rhs)}}));
}

Formula Formula::exists(std::string var, Formula body) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::Exists, std::move(var), {}, {std::move(body)}}));
}

Formula Formula::forall(std::string var, Formula body) {
  return Formula(std::make_shared<const FormulaNode>(FormulaNode{FormulaKind::Forall, std::move(var), {}, {std::move(body)}}));
}

Formula Formula::exists(const std::vector<std::string>& vars, Formula body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = exists(*it, std::move(body));
  return body;
}

Formula Formula::forall(const std::vector<std::string>& vars, Formula body) {
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = forall(*it, std::move(body));
  return body;
}

FormulaKind Formula::kind() const noexcept { return node_->kind; }

const std::string& Formula::relation() const {
  return node_->kind == FormulaKind::Atom ? node_->name : kEmpty;
}

const std::vector<Term>& Formula::terms() const { return node_->terms; }
const std::vector<Formula>& Formula::children() const { return node_->children; }
const std::string& Formula::variable() const { return is_quantifier() ? node_->name : kEmpty; }

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  return node_->kind == other.node_->kind && node_->name == other.node_->name && node_->terms == other.node_->terms &&
         node_->children == other.node_->children;
}

// ---------------------------------------------------------------------------
// Variables and vocabulary

namespace {

void collect_free(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  switch (f.kind()) {
    case FormulaKind::Atom:
    case FormulaKind::Equal:
      for (const auto& t : f.terms())
        if (t.is_variable() && !bound.count(t.name)) out.insert(t.name);
      return;
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      const bool fresh = bound.insert(f.variable()).second;
      collect_free(f.child(), bound, out);
      if (fresh) bound.erase(f.variable());
      return;
    }
    default:
      for (const auto& c : f.children()) collect_free(c, bound, out);
  }
}

void collect_all(const Formula& f, std::set<std::string>& out) {
  if (f.is_quantifier()) out.insert(f.variable());
  for (const auto& t : f.terms())
    if (t.is_variable()) out.insert(t.name);
  for (const auto& c : f.children()) collect_all(c, out);
}

}  // namespace

std::set<std::string> free_variables(const Formula& f) {
  std::set<std::string> bound, out;
  collect_free(f, bound, out);
  return out;
}

std::set<std::string> all_variables(const Formula& f) {
  std::set<std::string> out;
  collect_all(f, out);
  return out;
}

std::size_t formula_size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& c : f.children()) n += formula_size(c);
  return n;
}

void check_vocabulary(const Formula& f, const Vocabulary& vocab) {
  for (const auto& t : f.terms())
    if (!t.is_variable() && !vocab.has_constant(t.name))
      throw VocabularyError("unknown constant '" + t.name + "'");
  if (f.kind() == FormulaKind::Atom) {
    auto idx = vocab.relation_index(f.relation());
    if (!idx) throw VocabularyError("unknown relation '" + f.relation() + "'");
    if (static_cast<std::size_t>(vocab.relations()[*idx].arity) != f.terms().size())
      throw VocabularyError("relation '" + f.relation() + "' has arity " + std::to_string(vocab.relations()[*idx].arity) +
                            " but is applied to " + std::to_string(f.terms().size()) + " arguments");
  }
  if (f.is_quantifier() && vocab.has_constant(f.variable()))
    throw VocabularyError("cannot quantify over constant '" + f.variable() + "'");
  for (const auto& c : f.children()) check_vocabulary(c, vocab);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Larger binds tighter.
int precedence(FormulaKind k) {
  switch (k) {
    case FormulaKind::Exists:
    case FormulaKind::Forall: return 0;
    case FormulaKind::Implies: return 1;
    case FormulaKind::Or: return 2;
    case FormulaKind::And: return 3;
    case FormulaKind::Not: return 4;
    default: return 5;
  }
}

void print(const Formula& f, int context, std::ostream& out) {
  const int prec = precedence(f.kind());
  const bool parens = prec < context || (f.is_quantifier() && context > 0);
  if (parens) out << '(';
  switch (f.kind()) {
    case FormulaKind::True: out << "true"; break;
    case FormulaKind::False: out << "false"; break;
    case FormulaKind::Atom:
      if (f.relation() == kOrderSymbol && f.terms().size() == 2) {
        out << f.terms()[0].name << " <= " << f.terms()[1].name;
      } else {
        out << f.relation() << '(';
        for (std::size_t i = 0; i < f.terms().size(); ++i) out << (i ? "," : "") << f.terms()[i].name;
        out << ')';
      }
      break;
    case FormulaKind::Equal: out << f.terms()[0].name << " = " << f.terms()[1].name; break;
    case FormulaKind::Not:
      out << '!';
      print(f.child(), 4, out);
      break;
    case FormulaKind::And:
    case FormulaKind::Or: {
      const char* sep = f.kind() == FormulaKind::And ? " & " : " | ";
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        if (i) out << sep;
        print(f.children()[i], prec + 1, out);
      }
      break;
    }
    case FormulaKind::Implies:
      print(f.child(0), 2, out);
      out << " -> ";
      print(f.child(1), 1, out);
      break;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      out << (f.kind() == FormulaKind::Exists ? "exists " : "forall ") << f.variable() << ". ";
      print(f.child(), 0, out);
      break;
  }
  if (parens) out << ')';
}

}  // namespace

std::string to_string(const Formula& f) {
  std::ostringstream out;
  print(f, 0, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class FormulaParser {
 public:
  FormulaParser(std::string_view text, const Vocabulary& vocab) : text_(text), vocab_(vocab) {}

  Formula parse() {
    Formula f = formula();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    check_vocabulary(f, vocab_);
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(0, "column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) != token) return false;
    // Keywords must not run into identifier characters.
    if (std::isalpha(static_cast<unsigned char>(token.back())) && pos_ + token.size() < text_.size() &&
        is_ident_char(text_[pos_ + token.size()]))
      return false;
    pos_ += token.size();
    return true;
  }

  void expect(std::string_view token) {
    if (!accept(token)) fail("expected '" + std::string(token) + "'");
  }

  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  std::string identifier() {
    skip_space();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
      while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    }
    if (start == pos_) fail("expected an identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  Term term() {
    std::string name = identifier();
    return vocab_.has_constant(name) ? Term::constant(std::move(name)) : Term::var(std::move(name));
  }

  Formula formula() {
    if (auto q = quantifier()) return *q;
    Formula lhs = disjunction();
    if (accept("->")) return Formula::implication(lhs, formula());
    return lhs;
  }

  std::optional<Formula> quantifier() {
    const bool is_exists = accept("exists");
    if (!is_exists && !accept("forall")) return std::nullopt;
    std::string var = identifier();
    expect(".");
    Formula body = formula();
    return is_exists ? Formula::exists(var, body) : Formula::forall(var, body);
  }

  Formula disjunction() {
    std::vector<Formula> parts{conjunction()};
    while (accept("|")) parts.push_back(conjunction());
    return Formula::disjunction(std::move(parts));
  }

  Formula conjunction() {
    std::vector<Formula> parts{unary()};
    while (accept("&")) parts.push_back(unary());
    return Formula::conjunction(std::move(parts));
  }

  Formula unary() {
    if (accept("!")) return Formula::negation(unary());
    if (accept("(")) {
      Formula inner = formula();
      expect(")");
      return inner;
    }
    if (auto q = quantifier()) return *q;
    if (accept("true")) return Formula::truth();
    if (accept("false")) return Formula::falsity();
    return atom();
  }

  Formula atom() {
    skip_space();
    const std::size_t start = pos_;
    std::string name = identifier();
    if (accept("(")) {
      std::vector<Term> args;
      if (!accept(")")) {
        do args.push_back(term());
        while (accept(","));
        expect(")");
      }
      return Formula::atom(std::move(name), std::move(args));
    }
    pos_ = start;
    Term lhs = term();
    if (accept("<=")) return Formula::le(lhs, term());
    if (accept("=")) return Formula::equal(lhs, term());
    fail("expected an atom");
  }

  std::string_view text_;
  const Vocabulary& vocab_;
  std::size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text, const Vocabulary& vocab) { return FormulaParser(text, vocab).parse(); }

// ---------------------------------------------------------------------------
// Substitution, renaming and relativization

namespace {

Formula rebuild(const Formula& f, std::vector<Formula> children) {
  switch (f.kind()) {
    case FormulaKind::Not: return Formula::negation(std::move(children[0]));
    case FormulaKind::And: return Formula::conjunction(std::move(children));
    case FormulaKind::Or: return Formula::disjunction(std::move(children));
    case FormulaKind::Implies: return Formula::implication(std::move(children[0]), std::move(children[1]));
    case FormulaKind::Exists: return Formula::exists(f.variable(), std::move(children[0]));
    case FormulaKind::Forall: return Formula::forall(f.variable(), std::move(children[0]));
    default: return f;
  }
}

std::string fresh_name(const std::string& base, std::set<std::string>& used) {
  for (int i = 1;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (used.insert(candidate).second) return candidate;
  }
}

// Rename binders whose variable is in `avoid`, drawing fresh names from `used`.
Formula rename_bound(const Formula& f, const std::set<std::string>& avoid, std::set<std::string>& used) {
  if (f.is_quantifier()) {
    Formula body = f.child();
    std::string var = f.variable();
    if (avoid.count(var)) {
      std::string renamed = fresh_name(var, used);
      body = substitute(body, var, Term::var(renamed));
      var = renamed;
    }
    body = rename_bound(body, avoid, used);
    return f.kind() == FormulaKind::Exists ? Formula::exists(var, body) : Formula::forall(var, body);
  }
  if (f.children().empty()) return f;
  std::vector<Formula> children;
  for (const auto& c : f.children()) children.push_back(rename_bound(c, avoid, used));
  return rebuild(f, std::move(children));
}

Formula relativize_body(const Formula& f, const Term& x, const Term& y) {
  if (f.is_quantifier()) {
    const Term z = Term::var(f.variable());
    Formula guard = Formula::conjunction({Formula::le(x, z), Formula::le(z, y)});
    Formula body = relativize_body(f.child(), x, y);
    if (f.kind() == FormulaKind::Exists) return Formula::exists(f.variable(), Formula::conjunction({guard, body}));
    return Formula::forall(f.variable(), Formula::implication(guard, body));
  }
  if (f.children().empty()) return f;
  std::vector<Formula> children;
  for (const auto& c : f.children()) children.push_back(relativize_body(c, x, y));
  return rebuild(f, std::move(children));
}

}  // namespace

Formula substitute(const Formula& f, const std::string& from, const Term& to) {
  switch (f.kind()) {
    case FormulaKind::Atom:
    case FormulaKind::Equal: {
      std::vector<Term> terms = f.terms();
      bool changed = false;
      for (auto& t : terms)
        if (t.is_variable() && t.name == from) {
          t = to;
          changed = true;
        }
      if (!changed) return f;
      return f.kind() == FormulaKind::Atom ? Formula::atom(f.relation(), std::move(terms))
                                           : Formula::equal(std::move(terms[0]), std::move(terms[1]));
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      if (f.variable() == from) return f;
      if (to.is_variable() && f.variable() == to.name)
        throw Error("substitution of '" + to.name + "' would be captured by a quantifier");
      return rebuild(f, {substitute(f.child(), from, to)});
    default: {
      if (f.children().empty()) return f;
      std::vector<Formula> children;
      for (const auto& c : f.children()) children.push_back(substitute(c, from, to));
      return rebuild(f, std::move(children));
    }
  }
}

Formula relativize(const Formula& f, const std::string& x, const std::string& y) {
  std::set<std::string> used = all_variables(f);
  used.insert(x);
  used.insert(y);
  Formula renamed = rename_bound(f, {x, y}, used);
  const Term tx = Term::var(x), ty = Term::var(y);
  return Formula::conjunction({Formula::le(tx, ty), relativize_body(renamed, tx, ty)});
}

// ---------------------------------------------------------------------------
// Normal forms

namespace {

Formula nnf(const Formula& f, bool negate) {
  switch (f.kind()) {
    case FormulaKind::True: return negate ? Formula::falsity() : f;
    case FormulaKind::False: return negate ? Formula::truth() : f;
    case FormulaKind::Atom:
    case FormulaKind::Equal: return negate ? Formula::negation(f) : f;
    case FormulaKind::Not: return nnf(f.child(), !negate);
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Formula> parts;
      for (const auto& c : f.children()) parts.push_back(nnf(c, negate));
      const bool conj = (f.kind() == FormulaKind::And) != negate;
      return conj ? Formula::conjunction(std::move(parts)) : Formula::disjunction(std::move(parts));
    }
    case FormulaKind::Implies: {
      std::vector<Formula> parts{nnf(f.child(0), !negate), nnf(f.child(1), negate)};
      return negate ? Formula::conjunction(std::move(parts)) : Formula::disjunction(std::move(parts));
    }
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      const bool ex = (f.kind() == FormulaKind::Exists) != negate;
      Formula body = nnf(f.child(), negate);
      return ex ? Formula::exists(f.variable(), body) : Formula::forall(f.variable(), body);
    }
  }
  return f;
}

// Give every binder a distinct name that is also distinct from the free
// variables. `seen` holds names already claimed; `names` every name in use.
Formula standardize_apart(const Formula& f, std::set<std::string>& seen, std::set<std::string>& names) {
  if (f.is_quantifier()) {
    std::string var = f.variable();
    Formula body = f.child();
    if (!seen.insert(var).second) {
      std::string renamed = fresh_name(var, names);
      seen.insert(renamed);
      body = substitute(body, var, Term::var(renamed));
      var = renamed;
    }
    body = standardize_apart(body, seen, names);
    return f.kind() == FormulaKind::Exists ? Formula::exists(var, body) : Formula::forall(var, body);
  }
  if (f.children().empty()) return f;
  std::vector<Formula> children;
  for (const auto& c : f.children()) children.push_back(standardize_apart(c, seen, names));
  return rebuild(f, std::move(children));
}

struct Block {
  bool existential;
  std::vector<std::string> vars;
};

struct Prenexed {
  std::vector<Block> prefix;
  Formula matrix;
};

std::vector<Block> merge_prefixes(const std::vector<Block>& p, const std::vector<Block>& q) {
  std::vector<Block> out;
  auto push = [&](const Block& b) {
    if (!out.empty() && out.back().existential == b.existential)
      out.back().vars.insert(out.back().vars.end(), b.vars.begin(), b.vars.end());
    else
      out.push_back(b);
  };
  std::size_t i = 0, j = 0;
  while (i < p.size() && j < q.size()) {
    if (p[i].existential == q[j].existential) {
      push(p[i++]);
      push(q[j++]);
      continue;
    }
    // Emit from the side with more blocks left so the other can catch up;
    // on a tie emit the existential block first.
    const std::size_t left_p = p.size() - i, left_q = q.size() - j;
    const bool take_p = left_p != left_q ? left_p > left_q : p[i].existential;
    push(take_p ? p[i++] : q[j++]);
  }
  while (i < p.size()) push(p[i++]);
  while (j < q.size()) push(q[j++]);
  return out;
}

Prenexed prenex(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      Prenexed inner = prenex(f.child());
      const bool ex = f.kind() == FormulaKind::Exists;
      if (!inner.prefix.empty() && inner.prefix.front().existential == ex)
        inner.prefix.front().vars.insert(inner.prefix.front().vars.begin(), f.variable());
      else
        inner.prefix.insert(inner.prefix.begin(), Block{ex, {f.variable()}});
      return inner;
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<Block> prefix;
      std::vector<Formula> matrices;
      for (const auto& c : f.children()) {
        Prenexed part = prenex(c);
        prefix = merge_prefixes(prefix, part.prefix);
        matrices.push_back(std::move(part.matrix));
      }
      Formula matrix = f.kind() == FormulaKind::And ? Formula::conjunction(std::move(matrices))
                                                    : Formula::disjunction(std::move(matrices));
      return {std::move(prefix), std::move(matrix)};
    }
    default:
      return {{}, f};
  }
}

}  // namespace

Formula to_nnf(const Formula& f) { return nnf(f, false); }

Formula to_pnf(const Formula& f) {
  std::set<std::string> seen = free_variables(f);
  std::set<std::string> names = all_variables(f);
  Formula apart = standardize_apart(to_nnf(f), seen, names);
  Prenexed p = prenex(apart);
  Formula out = p.matrix;
  for (auto it = p.prefix.rbegin(); it != p.prefix.rend(); ++it)
    out = it->existential ? Formula::exists(it->vars, out) : Formula::forall(it->vars, out);
  return out;
}

namespace {

bool quantifier_free(const Formula& f) {
  if (f.is_quantifier()) return false;
  return std::all_of(f.children().begin(), f.children().end(), quantifier_free);
}

}  // namespace

bool is_prenex(const Formula& f) {
  const Formula* cur = &f;
  while (cur->is_quantifier()) cur = &cur->child();
  return quantifier_free(*cur);
}

PrefixClass classify_prefix(const Formula& f) {
  if (!is_prenex(f)) throw Error("classify_prefix requires a prenex formula");
  PrefixClass c;
  const Formula* cur = &f;
  std::optional<FormulaKind> run_kind;
  int run = 0;
  while (cur->is_quantifier()) {
    if (run_kind != cur->kind()) {
      if (!run_kind) c.kind = cur->kind() == FormulaKind::Exists ? PrefixClass::Kind::Sigma : PrefixClass::Kind::Pi;
      ++c.blocks;
      run_kind = cur->kind();
      run = 0;
    }
    c.width = std::max(c.width, ++run);
    cur = &cur->child();
  }
  return c;
}

std::string to_string(const PrefixClass& c) {
  return std::string(c.kind == PrefixClass::Kind::Sigma ? "Sigma" : "Pi") + "(" + std::to_string(c.blocks) + "," +
         std::to_string(c.width) + ")";
}

}  // namespace extclosed
