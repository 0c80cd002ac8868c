#pragma once

// Reference implementations used only by the tests. They deliberately take
// different routes from the library: Pascal's triangle instead of the
// multiplicative binomial, brute-force pair scans instead of a hull, direct
// enumeration instead of combinadic ranks.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Q = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                        boost::multiprecision::et_off>;
using Z = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                        boost::multiprecision::et_off>;

inline Z pascal(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  static std::vector<std::vector<Z>> rows{{1}};
  while (static_cast<int>(rows.size()) <= n) {
    const auto& prev = rows.back();
    std::vector<Z> next(prev.size() + 1, 1);
    for (std::size_t i = 1; i < prev.size(); ++i) next[i] = prev[i - 1] + prev[i];
    rows.push_back(std::move(next));
  }
  return rows[n][k];
}

inline Q C(int n, int k) { return Q(pascal(n, k)); }

/// All k-subsets of {1..n} as sorted vectors, by recursive extension.
inline void subsets_rec(int n, int k, int next, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int x = next; x <= n; ++x) {
    cur.push_back(x);
    subsets_rec(n, k, x + 1, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  subsets_rec(n, k, 1, cur, out);
  return out;
}

/// Lower convex envelope at x: the smallest chord value over every pair of
/// points bracketing x (and the point itself when x hits one).
inline Q lowc(const std::vector<std::pair<Q, Q>>& pts, const Q& x) {
  bool have = false;
  Q best;
  for (const auto& a : pts) {
    if (a.first == x && (!have || a.second < best)) {
      best = a.second;
      have = true;
    }
    for (const auto& b : pts) {
      if (!(a.first < x && x < b.first)) continue;
      const Q v = a.second + (b.second - a.second) * (x - a.first) / (b.first - a.first);
      if (!have || v < best) {
        best = v;
        have = true;
      }
    }
  }
  return best;
}

// Per-receiver DoF of the cooperative X-multicast channel, written in the
// binomial (unsimplified) form throughout.
inline Q dof(int s, int t, int Kt, int Kr) {
  if (s + t >= Kr + 1) return 1;
  if (s + t == Kr) {
    const Q x = C(Kr - 1, s - 1) * C(Kt, t) * t;
    return x / (x + 1);
  }
  Q dp = 0;
  for (int tp = 1; tp <= t; ++tp) {
    const Q good = C(Kr - 1, s - 1) * C(Kt, tp) * C(Kr - s, tp - 1) * tp;
    const Q bad = C(Kr - 1, s) * C(Kr - s - 1, tp - 1) * C(Kt, tp - 1);
    dp = std::max(dp, good / (good + bad));
  }
  return std::max(dp, Q(s + t - 1, Kr));
}

/// Partition count times per-partition load over the DoF.
inline Q ndt_cpc(int r, int t, int K, int Kr) {
  if (r == K) return 0;
  const int s = r + 1 - t;
  const int Kt = K - Kr;
  // Each receiver decodes C(Kt,t) C(Kr-1,s-1) segments of size 1/(C(r,t) C(K-r-1,Kr-s))
  // of a block; a block is 1/(K C(K,r)) of the NQB bits. C(K,Kr) partitions in all.
  const Q per_partition = C(Kt, t) * C(Kr - 1, s - 1) / (C(r, t) * C(K - r - 1, Kr - s) * C(K, r) * K);
  return C(K, Kr) * per_partition / dof(s, t, Kt, Kr);
}

inline bool valid(int r, int t, int K, int Kr) {
  const int s = r + 1 - t;
  return Kr >= 1 && Kr <= K && t >= 1 && t <= r && s <= Kr && t <= K - Kr;
}

inline Q brute_min(int r, int K, int max_t = 1 << 20) {
  if (r == K) return 0;
  bool have = false;
  Q best;
  for (int Kr = 1; Kr <= K; ++Kr)
    for (int t = 1; t <= std::min(r, max_t); ++t)
      if (valid(r, t, K, Kr)) {
        const Q v = ndt_cpc(r, t, K, Kr);
        if (!have || v < best) best = v, have = true;
      }
  return best;
}

inline Q lower_bound(const Q& r, int K) {
  const Q local = 1 - r / K;
  Q lb1;
  if (r == 1) {
    lb1 = Q(1, K) * (2 - Q(2, K));
  } else if (r < (K + 1) / 2) {
    Q best = 0;
    for (int t = 1; t <= K / 2; ++t) {
      std::vector<std::pair<Q, Q>> pts;
      for (int i = 1; i <= K; ++i) pts.emplace_back(i, i <= t ? C(K - i, t - i) * (K - t) / (C(K, t) * t) : Q(0));
      best = std::max(best, lowc(pts, r));
    }
    lb1 = Q(1, K) * (local + best);
  } else {
    lb1 = Q(1, K) * local;
  }
  return std::max(lb1, Q(1, K - 1) * local);
}

struct RandomConfig {
  int K, r, K_r, t;
  std::int64_t N, Q;
  std::uint64_t B;
};

/// A valid configuration with K <= max_K, r < K, integer eta1, eta2 and byte-aligned segments.
inline RandomConfig random_config(std::mt19937_64& rng, int max_K = 8) {
  for (;;) {
    const int K = std::uniform_int_distribution<int>(2, max_K)(rng);
    const int r = std::uniform_int_distribution<int>(1, K - 1)(rng);
    const int Kr = std::uniform_int_distribution<int>(1, K - 1)(rng);
    const int t = std::uniform_int_distribution<int>(1, r)(rng);
    if (!valid(r, t, K, Kr)) continue;
    const int s = r + 1 - t;
    const std::int64_t eta1 = std::uniform_int_distribution<int>(1, 2)(rng);
    const std::int64_t eta2 = std::uniform_int_distribution<int>(1, 2)(rng);
    const auto unit = static_cast<std::uint64_t>(pascal(r, t) * pascal(K - r - 1, Kr - s)) * 8;
    const std::uint64_t B = unit * std::uniform_int_distribution<int>(1, 2)(rng);
    return RandomConfig{K, r, Kr, t, static_cast<std::int64_t>(pascal(K, r)) * eta1, eta2 * K, B};
  }
}

}  // namespace oracle
