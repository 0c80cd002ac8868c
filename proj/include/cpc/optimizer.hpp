#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cpc/core.hpp"

namespace cpc {

enum class Branch {
  kNDT1,       // K_r = r + 1 with t = t*
  kNDT2,       // t = 1 with K_r = K_r*
  kTie,
  kNoShuffle,  // r = K
};

std::string to_string(Branch b);

struct OptimumParams {
  int r = 0;
  int K = 0;
  Rational best_value;
  int K_r_star = 0;  // 0 together with kNoShuffle
  int t_star = 0;
  int s_star = 0;
  Branch branch = Branch::kNoShuffle;
  std::size_t argmin_count = 0;  // brute force only: configs attaining best_value
};

/// Exhaustive scan of valid (K_r, t); ties go to smaller K_r, then smaller t.
/// Branch: NDT2 when every minimizer has t = 1, NDT1 when none does, tie otherwise.
OptimumParams brute_force_min(int r, int K);

struct ClosedForm {
  int t_star = 0;
  std::optional<Rational> ndt1;  // empty when C(r,t*) C(K-r-1,t*) t* = 0
  int K_r_star = 0;
  Rational ndt2;
};

/// t*, NDT1, K_r* and NDT2 in exact integer arithmetic.
ClosedForm closed_form_terms(int r, int K);
int optimal_t(int r, int K);
int optimal_K_r(int r, int K);

OptimumParams closed_form_min(int r, int K);

/// r = 1, K <= 5, or K >= max{r + 4 + 4/(r-1), (r + 4 + sqrt(r^2 + 16 r)) / 2}, tested exactly.
bool theorem3_regime(int r, int K);

struct CrossCell {
  int r = 0;
  int K = 0;
  Rational brute;
  Rational closed;
  int K_r_star = 0;
  int t_star = 0;
  bool agree = false;
};

struct CrossReport {
  int K_max = 0;
  std::vector<CrossCell> cells;  // ordered by K, then r
  std::size_t discrepancies = 0;
};

/// Every integer (r, K) with 2 <= K <= K_max <= 40 and 1 <= r <= K - 1.
CrossReport cross_validate(int K_max);

}  // namespace cpc
