#pragma once

#include <map>
#include <string>
#include <string_view>

#include "extclosed/datalog.hpp"
#include "extclosed/formula.hpp"
#include "extclosed/structure.hpp"

namespace extclosed {

/// Exact integer type for the counting arguments; default copy counts
/// overflow 64 bits for large n and k.
using Count = __int128;
std::string count_to_string(Count c);

/// rho(1,k) = 2k+2, rho(n+1,k) = (k+2)(rho(n,k)+1).
Count rho(int n, int k);

/// sigma_1 = {<=, S, R}; sigma_n adds S<n>, R<n> (binary) and P<n> (unary).
Vocabulary sigma(int n);
/// Names of the level-j symbols: level 1 is S, R; level j >= 2 is Sj, Rj, Pj.
std::string succ_symbol(int j);
std::string r_symbol(int j);
std::string p_symbol(int j);

/// Multiplicities of the structure families. Overrides are keyed by slot
/// name, optionally indexed by level: `tot1_len`, `tot_copies(j)`,
/// `gap_side(j)`, `N_copies(j)`, `M_side(j)`; an unindexed key applies to
/// every level. A side s stands for 2s+1 copies.
struct ScaleParams {
  int n = 1;
  int k = 1;
  std::map<std::string, long long> overrides;

  /// Throws Error on unknown keys or values breaking the shape constraints.
  void validate() const;

  Count tot1_len() const;
  /// Copies of M+_{j-1} in Tot_j and Gap_j (j >= 2).
  Count tot_copies(int j) const;
  /// Copies of Gap_j in N_j and M_j.
  Count n_copies(int j) const;

  static Count default_tot1_len(int k);
  static Count default_tot_copies(int j, int k);
  static Count default_n_copies(int j, int k);
};

/// Parses `key=value,key=value`; keys may carry a level suffix `(j)`.
std::map<std::string, long long> parse_overrides(std::string_view text);

/// Element counts of the families at level j (j <= p.n), without building.
struct FamilySizes {
  Count tot = 0, gap = 0, n = 0, m = 0;
};
FamilySizes family_sizes(const ScaleParams& p, int level);

/// Builds refuse structures larger than this many elements.
inline constexpr long long kMaxBuildElements = 20'000'000;

Structure build_L(int m);
Structure build_G(int m);
Structure build_Tot(const ScaleParams& p);
Structure build_Gap(const ScaleParams& p);
Structure build_M(const ScaleParams& p);
Structure build_N(const ScaleParams& p);

/// Sentences and formulas. Names: NLO, PartialSucc, Total, SomeTotalR,
/// Succ, PartialSuccN, TotalN, SomeTotalRN, FullQuery, PhiN. Total, TotalN
/// and Succ have free variables x, y. PhiN uses constants a, b.
Formula build_sentence(std::string_view name, int n = 1);
/// Vocabulary the named formula is over.
Vocabulary sentence_vocabulary(std::string_view name, int n = 1);

/// Datalog(not) program over sigma_n with goal G for NLO, the violations of
/// PartialSucc and PartialSucc_n, and R_n(u,v), Total_n(u,v).
DatalogProgram build_datalog(int n);

}  // namespace extclosed
