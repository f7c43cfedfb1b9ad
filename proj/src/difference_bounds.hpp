#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace extclosed::detail {

/// Difference constraints x_j - x_i <= c over a handful of integer variables.
/// Node 0 is the fixed origin (value 0), so bounds on single variables and
/// known values are expressed against it. Used to turn conjunctions of
/// natural-order and equality literals into element intervals.
class DifferenceBounds {
 public:
  static constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

  explicit DifferenceBounds(int variables) : n_(variables + 1), d_(static_cast<std::size_t>(n_ * n_), kInf) {
    for (int i = 0; i < n_; ++i) at(i, i) = 0;
  }

  /// x_j - x_i <= c, with variables numbered from 1 and 0 as the origin.
  void add(int i, int j, std::int64_t c) { at(i, j) = std::min(at(i, j), c); }

  /// Closes the system; returns false when it has no integer solution.
  bool close() {
    for (int k = 0; k < n_; ++k)
      for (int i = 0; i < n_; ++i) {
        if (at(i, k) >= kInf) continue;
        for (int j = 0; j < n_; ++j) {
          if (at(k, j) >= kInf) continue;
          at(i, j) = std::min(at(i, j), at(i, k) + at(k, j));
        }
      }
    for (int i = 0; i < n_; ++i)
      if (at(i, i) < 0) return false;
    return true;
  }

  /// Valid after close().
  std::int64_t upper(int v) const { return at(0, v); }
  std::int64_t lower(int v) const { return at(v, 0) >= kInf ? -kInf : -at(v, 0); }

 private:
  std::int64_t& at(int i, int j) { return d_[static_cast<std::size_t>(i * n_ + j)]; }
  std::int64_t at(int i, int j) const { return d_[static_cast<std::size_t>(i * n_ + j)]; }

  int n_;
  std::vector<std::int64_t> d_;
};

}  // namespace extclosed::detail
