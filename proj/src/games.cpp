#include "extclosed/games.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "extclosed/errors.hpp"
#include "extclosed/structure_ops.hpp"

namespace extclosed {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<Element>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (Element e : v) {
      h ^= static_cast<std::uint32_t>(e);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Sharded so that first-round workers can share it. Values for a key never
// differ between writers, so lost races are harmless.
class Memo {
 public:
  std::optional<bool> find(const std::vector<Element>& key) const {
    const Shard& s = shard(key);
    std::lock_guard lock(s.mutex);
    auto it = s.map.find(key);
    if (it == s.map.end()) return std::nullopt;
    return it->second;
  }
  void insert(std::vector<Element> key, bool value) {
    Shard& s = shard(key);
    std::lock_guard lock(s.mutex);
    s.map.emplace(std::move(key), value);
  }

 private:
  struct Shard {
    mutable std::mutex mutex;
    std::unordered_map<std::vector<Element>, bool, KeyHash> map;
  };
  static constexpr std::size_t kShards = 64;
  Shard& shard(const std::vector<Element>& key) { return shards_[KeyHash{}(key) % kShards]; }
  const Shard& shard(const std::vector<Element>& key) const { return shards_[KeyHash{}(key) % kShards]; }
  std::array<Shard, kShards> shards_;
};

std::pair<Element, Element> min_max(const Structure& s) {
  const auto rank = order_ranks(s);
  Element lo = 1, hi = 1;
  for (Element e = 1; e <= s.size(); ++e) {
    if (rank[static_cast<std::size_t>(e)] == 1) lo = e;
    if (rank[static_cast<std::size_t>(e)] == s.size()) hi = e;
  }
  return {lo, hi};
}

// Shared board for both games: the relation tables side by side, the pairs
// every position must respect, and the state counter.
class Arena {
 public:
  Arena(const Structure& a, const Structure& b, bool starred, std::uint64_t budget)
      : A(a), B(b), budget_(budget) {
    if (!(a.vocab() == b.vocab())) throw VocabularyError("game between structures over different vocabularies");
    for (std::size_t r = 0; r < a.vocab().relations().size(); ++r)
      rels_.push_back({&a.relation(r), &b.relation(r), a.vocab().relations()[r].arity == 1});
    if (auto idx = a.vocab().relation_index(kOrderSymbol); idx && a.vocab().relations()[*idx].arity == 2)
      ordered_ = a.relation(*idx).is_natural_order() && b.relation(*idx).is_natural_order();
    for (std::size_t c = 0; c < a.constants().size(); ++c) fixed_.emplace_back(a.constants()[c], b.constants()[c]);
    if (starred) {
      if (!check_ordered(a) || !check_ordered(b)) throw StructureError("starred game needs ordered structures");
      auto [amin, amax] = min_max(a);
      auto [bmin, bmax] = min_max(b);
      fixed_.emplace_back(amin, bmin);
      fixed_.emplace_back(amax, bmax);
    }
  }

  const Structure& A;
  const Structure& B;

  const PartialMap& fixed() const { return fixed_; }

  // Whether pairs + (x, y) is still a partial isomorphism, given that pairs is.
  bool compatible(const PartialMap& pairs, Element x, Element y) const {
    for (const auto& r : rels_) {
      if (r.unary) {
        if (r.a->contains(x) != r.b->contains(y)) return false;
      } else if (r.a->contains(x, x) != r.b->contains(y, y)) {
        return false;
      }
    }
    for (const auto& [p, q] : pairs) {
      if ((p == x) != (q == y)) return false;
      if (p == x) continue;
      for (const auto& r : rels_) {
        if (r.unary) continue;
        if (r.a->contains(x, p) != r.b->contains(y, q) || r.a->contains(p, x) != r.b->contains(q, y)) return false;
      }
    }
    return true;
  }

  // Candidate answers to e (played in A when in_a) respecting the order
  // pattern against the pairs placed so far.
  std::pair<Element, Element> window(const PartialMap& pairs, Element e, bool in_a) const {
    Element lo = 1, hi = in_a ? B.size() : A.size();
    if (!ordered_) return {lo, hi};
    for (const auto& [p, q] : pairs) {
      const Element own = in_a ? p : q;
      const Element other = in_a ? q : p;
      if (own < e)
        lo = std::max(lo, other + 1);
      else if (own > e)
        hi = std::min(hi, other - 1);
      else
        lo = std::max(lo, other), hi = std::min(hi, other);
    }
    return {lo, hi};
  }

  static bool mapped(const PartialMap& pairs, Element e, bool in_a) {
    for (const auto& [p, q] : pairs)
      if ((in_a ? p : q) == e) return true;
    return false;
  }

  // Memo key: rounds left, then the played part of the map, sorted.
  std::vector<Element> key(int left, const PartialMap& pairs) const {
    PartialMap played(pairs.begin() + static_cast<std::ptrdiff_t>(fixed_.size()), pairs.end());
    std::sort(played.begin(), played.end());
    played.erase(std::unique(played.begin(), played.end()), played.end());
    std::vector<Element> k;
    k.reserve(1 + 2 * played.size());
    k.push_back(left);
    for (const auto& [p, q] : played) {
      k.push_back(p);
      k.push_back(q);
    }
    return k;
  }

  void tick() {
    if (states_.fetch_add(1, std::memory_order_relaxed) + 1 > budget_)
      throw BudgetExceeded("game search exceeded its budget of " + std::to_string(budget_) + " states");
  }
  std::uint64_t states() const { return states_.load(); }

  Memo memo;

 private:
  struct Rel {
    const Relation* a;
    const Relation* b;
    bool unary;
  };
  std::vector<Rel> rels_;
  bool ordered_ = false;
  PartialMap fixed_;
  std::uint64_t budget_;
  std::atomic<std::uint64_t> states_{0};
};

// Fixed pairs followed by the initial map; nullopt if that already fails.
std::optional<PartialMap> opening(const Arena& arena, const PartialMap& initial) {
  PartialMap pairs;
  auto place = [&](Element x, Element y) {
    if (x < 1 || x > arena.A.size() || y < 1 || y > arena.B.size())
      throw StructureError("initial map index out of range");
    if (!arena.compatible(pairs, x, y)) return false;
    pairs.emplace_back(x, y);
    return true;
  };
  for (const auto& [x, y] : arena.fixed())
    if (!place(x, y)) return std::nullopt;
  for (const auto& [x, y] : initial)
    if (!place(x, y)) return std::nullopt;
  return pairs;
}

// Calls f on every increasing r-subset of `pool`; stops when f returns false.
bool for_each_subset(const std::vector<Element>& pool, std::size_t r,
                     const std::function<bool(const std::vector<Element>&)>& f) {
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  std::vector<Element> pick(r);
  while (true) {
    for (std::size_t i = 0; i < r; ++i) pick[i] = pool[idx[i]];
    if (!f(pick)) return false;
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == pool.size() - r + i - 1) --i;
    if (i == 0) return true;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

class PrefixGame {
 public:
  PrefixGame(Arena& arena, int n, int k) : arena_(arena), n_(n), k_(k) {}

  bool spoiler_in_a(int left) const { return (n_ - left) % 2 == 0; }

  // Spoiler's useful moves with `left` rounds to go. Choosing an element
  // that is already mapped, or repeating one, only helps Duplicator, so a
  // move is a set of min(k, #unmapped) unmapped elements.
  std::vector<std::vector<Element>> moves(int left, const PartialMap& pairs) const {
    const bool in_a = spoiler_in_a(left);
    const int size = in_a ? arena_.A.size() : arena_.B.size();
    std::vector<Element> pool;
    for (Element e = 1; e <= size; ++e)
      if (!Arena::mapped(pairs, e, in_a)) pool.push_back(e);
    std::vector<std::vector<Element>> out;
    const std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(k_), pool.size());
    for_each_subset(pool, r, [&](const std::vector<Element>& s) {
      out.push_back(s);
      return true;
    });
    return out;
  }

  bool win(int left, PartialMap& pairs) {
    if (left == 0) return true;
    auto key = arena_.key(left, pairs);
    if (auto hit = arena_.memo.find(key)) return *hit;
    arena_.tick();
    const bool in_a = spoiler_in_a(left);
    const int size = in_a ? arena_.A.size() : arena_.B.size();
    std::vector<Element> pool;
    for (Element e = 1; e <= size; ++e)
      if (!Arena::mapped(pairs, e, in_a)) pool.push_back(e);
    const std::size_t r = std::min<std::size_t>(static_cast<std::size_t>(k_), pool.size());
    const bool result =
        for_each_subset(pool, r, [&](const std::vector<Element>& move) { return answer(left, pairs, move); });
    arena_.memo.insert(std::move(key), result);
    return result;
  }

  // Whether Duplicator has a reply to `move` that still wins.
  bool answer(int left, PartialMap& pairs, const std::vector<Element>& move) {
    return assign(left, pairs, move, 0, spoiler_in_a(left));
  }

 private:
  bool assign(int left, PartialMap& pairs, const std::vector<Element>& move, std::size_t i, bool in_a) {
    if (i == move.size()) return win(left - 1, pairs);
    const Element e = move[i];
    auto [lo, hi] = arena_.window(pairs, e, in_a);
    for (Element y = lo; y <= hi; ++y) {
      const Element x = in_a ? e : y;
      const Element z = in_a ? y : e;
      if (!arena_.compatible(pairs, x, z)) continue;
      pairs.emplace_back(x, z);
      const bool ok = assign(left, pairs, move, i + 1, in_a);
      pairs.pop_back();
      if (ok) return true;
    }
    return false;
  }

  Arena& arena_;
  int n_;
  int k_;
};

void check_spec(const GameSpec& spec) {
  if (spec.n < 0) throw Error("game: n must be nonnegative");
  if (spec.k < 1) throw Error("game: k must be at least 1");
}

std::vector<Element> pad(std::vector<Element> move, int k) {
  while (!move.empty() && static_cast<int>(move.size()) < k) move.push_back(move.back());
  return move;
}

}  // namespace

GameVerdict prefix_implies(const Structure& A, const Structure& B, const GameSpec& spec, const GameOptions& options) {
  check_spec(spec);
  Arena arena(A, B, spec.starred, options.budget);
  auto start = opening(arena, spec.initial);
  if (!start) return GameVerdict{false, std::vector<Element>{}, 0};
  if (spec.n == 0) return GameVerdict{true, std::nullopt, 0};

  PrefixGame game(arena, spec.n, spec.k);
  arena.tick();
  const auto moves = game.moves(spec.n, *start);
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(moves.size())));

  // Index of the first refuted move; moves past it need not be examined.
  std::atomic<std::size_t> first_bad{moves.size()};
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      PartialMap pairs = *start;
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= moves.size() || i >= first_bad.load()) return;
        if (!game.answer(spec.n, pairs, moves[i])) {
          std::size_t cur = first_bad.load();
          while (i < cur && !first_bad.compare_exchange_weak(cur, i)) {
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(moves.size());
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  GameVerdict verdict;
  verdict.states = arena.states();
  verdict.holds = first_bad.load() == moves.size();
  if (!verdict.holds) verdict.witness = pad(moves[first_bad.load()], spec.k);
  return verdict;
}

bool prefix_equiv(const Structure& A, const Structure& B, const GameSpec& spec, const GameOptions& options) {
  if (!prefix_implies(A, B, spec, options).holds) return false;
  GameSpec back = spec;
  back.initial.clear();
  for (const auto& [a, b] : spec.initial) back.initial.emplace_back(b, a);
  return prefix_implies(B, A, back, options).holds;
}

bool rank_equiv(const Structure& A, const Structure& B, int m, const GameOptions& options) {
  if (m < 0) throw Error("rank_equiv: m must be nonnegative");
  Arena arena(A, B, false, options.budget);
  auto start = opening(arena, {});
  if (!start) return false;

  std::function<bool(int, PartialMap&)> win = [&](int left, PartialMap& pairs) -> bool {
    if (left == 0) return true;
    auto key = arena.key(left, pairs);
    if (auto hit = arena.memo.find(key)) return *hit;
    arena.tick();
    bool result = true;
    for (int side = 0; side < 2 && result; ++side) {
      const bool in_a = side == 0;
      const int size = in_a ? A.size() : B.size();
      for (Element e = 1; e <= size && result; ++e) {
        if (Arena::mapped(pairs, e, in_a)) continue;
        auto [lo, hi] = arena.window(pairs, e, in_a);
        bool answered = false;
        for (Element y = lo; y <= hi && !answered; ++y) {
          const Element x = in_a ? e : y;
          const Element z = in_a ? y : e;
          if (!arena.compatible(pairs, x, z)) continue;
          pairs.emplace_back(x, z);
          answered = win(left - 1, pairs);
          pairs.pop_back();
        }
        result = answered;
      }
    }
    arena.memo.insert(std::move(key), result);
    return result;
  };
  return win(m, *start);
}

GameVerdict naive_game_search(const Structure& A, const Structure& B, const GameSpec& spec,
                              const GameOptions& options) {
  check_spec(spec);
  if (!(A.vocab() == B.vocab())) throw VocabularyError("game between structures over different vocabularies");
  const double plays = std::pow(std::pow(static_cast<double>(A.size()), spec.k) *
                                    std::pow(static_cast<double>(B.size()), spec.k),
                                spec.n);
  if (plays > static_cast<double>(options.budget))
    throw BudgetExceeded("naive game search needs about " + std::to_string(plays) + " plays");

  const Structure a = spec.starred ? star_expand(A) : A;
  const Structure b = spec.starred ? star_expand(B) : B;
  GameVerdict verdict;
  PartialMap history = spec.initial;
  if (!is_partial_isomorphism(a, b, history, true)) {
    verdict.witness = std::vector<Element>{};
    return verdict;
  }

  // Odometer over all k-tuples of 1..size.
  auto next_tuple = [](std::vector<Element>& t, int size) {
    for (std::size_t i = t.size(); i-- > 0;) {
      if (t[i] < size) {
        ++t[i];
        return true;
      }
      t[i] = 1;
    }
    return false;
  };

  std::function<bool(int)> play = [&](int round) -> bool {
    if (round > spec.n) {
      ++verdict.states;
      return is_partial_isomorphism(a, b, history, true);
    }
    const bool in_a = round % 2 == 1;
    const int own = in_a ? a.size() : b.size();
    const int other = in_a ? b.size() : a.size();
    std::vector<Element> t(static_cast<std::size_t>(spec.k), 1);
    do {
      bool answered = false;
      std::vector<Element> u(static_cast<std::size_t>(spec.k), 1);
      do {
        for (std::size_t i = 0; i < t.size(); ++i)
          history.emplace_back(in_a ? t[i] : u[i], in_a ? u[i] : t[i]);
        answered = play(round + 1);
        history.resize(history.size() - t.size());
      } while (!answered && next_tuple(u, other));
      if (!answered) {
        if (round == 1) verdict.witness = t;
        return false;
      }
    } while (next_tuple(t, own));
    return true;
  };
  verdict.holds = play(1);
  return verdict;
}

CompositionCheck check_ordered_sum_composition(const Structure& A1, const Structure& A2, const Structure& B1,
                                               const Structure& B2, const GameSpec& spec, const PartialMap& params1,
                                               const PartialMap& params2, const GameOptions& options) {
  CompositionCheck out;
  GameSpec s = spec;
  s.starred = true;
  s.initial = params1;
  const bool first = prefix_implies(A1, B1, s, options).holds;
  s.initial = params2;
  out.hypothesis = first && prefix_implies(A2, B2, s, options).holds;
  if (!out.hypothesis) return out;

  // The sum relabels both summands by order rank; carry the parameters along.
  const auto ra1 = order_ranks(A1), rb1 = order_ranks(B1), ra2 = order_ranks(A2), rb2 = order_ranks(B2);
  s.initial.clear();
  for (const auto& [x, y] : params1)
    s.initial.emplace_back(ra1[static_cast<std::size_t>(x)], rb1[static_cast<std::size_t>(y)]);
  for (const auto& [x, y] : params2)
    s.initial.emplace_back(ra2[static_cast<std::size_t>(x)] + A1.size() - 1,
                           rb2[static_cast<std::size_t>(y)] + B1.size() - 1);
  out.conclusion = prefix_implies(ordered_sum(A1, A2), ordered_sum(B1, B2), s, options).holds;
  return out;
}

CompositionCheck check_minmax_composition(const Structure& A, const Structure& B, const GameSpec& spec,
                                          const std::string& symbol, int arity, const GameOptions& options) {
  if (arity != 1 && arity != 2) throw Error("minmax composition: arity must be 1 or 2");
  CompositionCheck out;
  GameSpec s = spec;
  s.starred = true;
  out.hypothesis = prefix_implies(A, B, s, options).holds;
  if (!out.hypothesis) return out;
  const std::optional<std::string> u = arity == 1 ? std::optional(symbol) : std::nullopt;
  const std::optional<std::string> t = arity == 2 ? std::optional(symbol) : std::nullopt;
  s.starred = false;
  out.conclusion = prefix_implies(minmax_expand(A, u, t), minmax_expand(B, u, t), s, options).holds;
  return out;
}

}  // namespace extclosed
