#include "cpc/optimizer.hpp"

#include "cpc/ndt_analytics.hpp"
#include "cpc/parallel.hpp"

namespace cpc {

std::string to_string(Branch b) {
  switch (b) {
    case Branch::kNDT1: return "NDT1";
    case Branch::kNDT2: return "NDT2";
    case Branch::kTie: return "tie";
    case Branch::kNoShuffle: return "no-shuffle";
  }
  return "?";
}

namespace {

void check(int r, int K) {
  if (K < 1) throw ParameterError("K must be positive");
  if (r < 1 || r > K) throw ParameterError("r must lie in [1, K]");
}

OptimumParams no_shuffle(int r, int K) {
  OptimumParams o;
  o.r = r;
  o.K = K;
  o.best_value = 0;
  o.branch = Branch::kNoShuffle;
  return o;
}

}  // namespace

OptimumParams brute_force_min(int r, int K) {
  check(r, K);
  if (r == K) return no_shuffle(r, K);
  OptimumParams best;
  best.r = r;
  best.K = K;
  bool found = false;
  bool min_has_t1 = false, min_has_other = false;
  for (int K_r = 1; K_r <= K; ++K_r) {
    for (int t = 1; t <= r; ++t) {
      const int s = r + 1 - t;
      if (s > K_r || t > K - K_r) continue;
      const Rational v = ndt_cpc(r, t, K, K_r).value;
      if (!found || v < best.best_value) {
        found = true;
        best.best_value = v;
        best.K_r_star = K_r;
        best.t_star = t;
        best.s_star = s;
        best.argmin_count = 1;
        min_has_t1 = t == 1;
        min_has_other = t != 1;
      } else if (v == best.best_value) {
        ++best.argmin_count;
        (t == 1 ? min_has_t1 : min_has_other) = true;
      }
    }
  }
  if (!found) throw InternalError("no valid config for r=" + std::to_string(r) + ", K=" + std::to_string(K));
  best.branch = min_has_t1 && min_has_other ? Branch::kTie : (min_has_t1 ? Branch::kNDT2 : Branch::kNDT1);
  return best;
}

int optimal_t(int r, int K) {
  check(r, K);
  // floor(1 + (-r^2 + rK - r) / K); the numerator is >= 0 for r <= K - 1.
  const std::int64_t num = static_cast<std::int64_t>(K) - static_cast<std::int64_t>(r) * r +
                           static_cast<std::int64_t>(r) * K - r;
  return static_cast<int>(floor(Rational(num, K)));
}

int optimal_K_r(int r, int K) {
  check(r, K);
  if (r == 1) return (K + 1) / 2;
  const BigInt A = BigInt(2) * r * K - r - 1;
  const BigInt Y = BigInt(4) * r * (K - 1) * (K - r) + BigInt(r - 1) * (r - 1);
  const BigInt M = BigInt(2) * (r - 1);
  auto ok = [&](const BigInt& z) {
    const BigInt a = A - z * M;
    return a >= 0 && a * a >= Y;
  };
  // isqrt(Y) <= sqrt(Y), so this starting point is at or above the answer.
  BigInt z = floor(Rational(A - isqrt(Y), M));
  while (!ok(z)) --z;
  while (ok(z + 1)) ++z;
  return static_cast<int>(z);
}

ClosedForm closed_form_terms(int r, int K) {
  check(r, K);
  if (r == K) throw ParameterError("closed forms need r <= K - 1");
  ClosedForm cf;
  cf.t_star = optimal_t(r, K);
  const BigInt prod = binomial_big(r, cf.t_star) * binomial_big(K - r - 1, cf.t_star) * cf.t_star;
  if (prod > 0) cf.ndt1 = Rational(1, r + 1) * (1 - Rational(r, K)) * (1 + 1 / Rational(prod));
  cf.K_r_star = optimal_K_r(r, K);
  const int Kt = K - cf.K_r_star;
  if (Kt <= 0) throw InternalError("K_r* leaves no transmitters");
  cf.ndt2 = Rational(1, r) * (1 - Rational(r, K)) * Rational(Kt * r + cf.K_r_star - r, Kt * cf.K_r_star);
  return cf;
}

OptimumParams closed_form_min(int r, int K) {
  check(r, K);
  if (r == K) return no_shuffle(r, K);
  const ClosedForm cf = closed_form_terms(r, K);
  OptimumParams o;
  o.r = r;
  o.K = K;
  auto take_ndt2 = [&] {
    o.best_value = cf.ndt2;
    o.K_r_star = cf.K_r_star;
    o.t_star = 1;
    o.s_star = r;
  };
  if (!cf.ndt1 || cf.ndt2 < *cf.ndt1) {
    take_ndt2();
    o.branch = Branch::kNDT2;
  } else if (*cf.ndt1 < cf.ndt2) {
    o.best_value = *cf.ndt1;
    o.K_r_star = r + 1;
    o.t_star = cf.t_star;
    o.s_star = r + 1 - cf.t_star;
    o.branch = Branch::kNDT1;
  } else {
    take_ndt2();
    o.branch = Branch::kTie;
  }
  return o;
}

bool theorem3_regime(int r, int K) {
  check(r, K);
  if (r == 1 || K <= 5) return true;
  const std::int64_t a = static_cast<std::int64_t>(K - r - 4) * (r - 1);
  const std::int64_t x = 2 * static_cast<std::int64_t>(K) - r - 4;
  return a >= 4 && x >= 0 && x * x >= static_cast<std::int64_t>(r) * r + 16 * r;
}

CrossReport cross_validate(int K_max) {
  if (K_max < 2 || K_max > 40) throw ParameterError("cross validation runs for 2 <= K_max <= 40");
  CrossReport rep;
  rep.K_max = K_max;
  for (int K = 2; K <= K_max; ++K)
    for (int r = 1; r <= K - 1; ++r) rep.cells.push_back(CrossCell{r, K, 0, 0, 0, 0, false});
  parallel_for(rep.cells.size(), [&](std::size_t i) {
    CrossCell& c = rep.cells[i];
    const OptimumParams b = brute_force_min(c.r, c.K);
    const OptimumParams f = closed_form_min(c.r, c.K);
    c.brute = b.best_value;
    c.closed = f.best_value;
    c.K_r_star = f.K_r_star;
    c.t_star = f.t_star;
    c.agree = b.best_value == f.best_value;
  });
  for (const auto& c : rep.cells)
    if (!c.agree) ++rep.discrepancies;
  return rep;
}

}  // namespace cpc
