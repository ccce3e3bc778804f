#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "hnls/common.hpp"

namespace hnls {

/// Hermite multi-index (l_1,...,l_d), d <= 3.
struct MultiIndex {
  std::array<int, 3> l{0, 0, 0};
  int dim = 1;

  int total() const { return l[0] + l[1] + l[2]; }
  int operator[](int i) const { return l[static_cast<std::size_t>(i)]; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.dim == b.dim && a.l == b.l;
  }
};

inline void check_dim(int d) {
  if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
}

/// lambda = 2|l| + d, the harmonic oscillator eigenvalue of the mode.
inline int eigenvalue(const MultiIndex& mi) { return 2 * mi.total() + mi.dim; }

/// C(n, k) for the small arguments used by mode bookkeeping.
inline std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Number of multi-indices with |l| = m in dimension d.
inline std::int64_t shell_size(int m, int d) {
  if (m < 0) return 0;
  return binomial(m + d - 1, d - 1);
}

/// Number of multi-indices with |l| <= L in dimension d.
inline std::int64_t simplex_size(int L, int d) {
  if (L < 0) return 0;
  return binomial(L + d, d);
}

/// Graded-lexicographic rank: by |l| ascending, then lexicographically by
/// (l_1, l_2, ...). Clusters occupy contiguous index ranges.
inline std::int64_t flat_index(const MultiIndex& mi) {
  const int m = mi.total();
  std::int64_t r = simplex_size(m - 1, mi.dim);
  int rem = m;
  int dleft = mi.dim;
  for (int i = 0; i < mi.dim - 1; ++i) {
    for (int a = 0; a < mi[i]; ++a) r += shell_size(rem - a, dleft - 1);
    rem -= mi[i];
    --dleft;
  }
  return r;
}

inline std::vector<MultiIndex> enumerate_shell(int m, int d) {
  check_dim(d);
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(shell_size(m, d)));
  if (m < 0) return out;
  if (d == 1) {
    out.push_back({{m, 0, 0}, 1});
  } else if (d == 2) {
    for (int a = 0; a <= m; ++a) out.push_back({{a, m - a, 0}, 2});
  } else {
    for (int a = 0; a <= m; ++a)
      for (int b = 0; b <= m - a; ++b) out.push_back({{a, b, m - a - b}, 3});
  }
  return out;
}

inline std::vector<MultiIndex> enumerate_modes(int max_level, int d) {
  check_dim(d);
  std::vector<MultiIndex> out;
  out.reserve(static_cast<std::size_t>(simplex_size(max_level, d)));
  for (int m = 0; m <= max_level; ++m) {
    auto shell = enumerate_shell(m, d);
    out.insert(out.end(), shell.begin(), shell.end());
  }
  return out;
}

/// Shell level |l| of cluster j (eigenvalues in [2j, 2j+2)), or -1 when the
/// cluster is empty (j < d/2).
inline int cluster_shell_level(int j, int d) {
  check_dim(d);
  // 2m + d in [2j, 2j+2)  <=>  m = j - d/2 (d even), m = j - (d-1)/2 (d odd)
  const int m = (d % 2 == 0) ? j - d / 2 : j - (d - 1) / 2;
  return m >= 0 ? m : -1;
}

/// The cluster label j whose eigenvalue window contains shell m.
inline int shell_cluster_label(int m, int d) {
  return (d % 2 == 0) ? m + d / 2 : m + (d - 1) / 2;
}

/// Eigenfunction indices with eigenvalue in [2j, 2j+2). Empty below j = d/2,
/// and empty when the shell sits above the level cap.
inline std::vector<MultiIndex> cluster_members(int j, int d,
                                               int max_level = 1 << 28) {
  if (j < 0) throw std::invalid_argument("cluster label must be >= 0");
  const int m = cluster_shell_level(j, d);
  if (m < 0 || m > max_level) return {};
  return enumerate_shell(m, d);
}

/// Closed-form cluster cardinality: j in d=2, j(j+1)/2 in d=3.
inline std::int64_t cluster_size(int j, int d) {
  const int m = cluster_shell_level(j, d);
  return m < 0 ? 0 : shell_size(m, d);
}

/// Shared immutable mode enumeration for a (dim, max_level) pair.
class ModeTable {
 public:
  ModeTable(int dim, int max_level)
      : dim_(dim),
        max_level_(max_level),
        modes_(enumerate_modes(max_level, dim)) {
    lambda_.reserve(modes_.size());
    for (const auto& mi : modes_) lambda_.push_back(eigenvalue(mi));
  }

  int dim() const { return dim_; }
  int max_level() const { return max_level_; }
  std::size_t size() const { return modes_.size(); }
  const std::vector<MultiIndex>& modes() const { return modes_; }
  const MultiIndex& mode(std::size_t i) const { return modes_[i]; }
  int lambda(std::size_t i) const { return lambda_[i]; }

  /// [begin, end) flat-index range of shell m.
  std::pair<std::size_t, std::size_t> shell_range(int m) const {
    return {static_cast<std::size_t>(simplex_size(m - 1, dim_)),
            static_cast<std::size_t>(simplex_size(m, dim_))};
  }

  static std::shared_ptr<const ModeTable> get(int dim, int max_level) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const ModeTable>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{dim, max_level}];
    if (!slot) slot = std::make_shared<ModeTable>(dim, max_level);
    return slot;
  }

 private:
  int dim_;
  int max_level_;
  std::vector<MultiIndex> modes_;
  std::vector<int> lambda_;
};

}  // namespace hnls
