#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpc/core.hpp"

namespace cpc {

enum class Scheme { kUncodedTDMA, kCDC, kOSL_FD, kOSL_HD, kBW_FD, kBW_HD, kCPC, kLowerBound };

/// Short label used in CSV output: Uncoded, CDC, OSL_FD, OSL_HD, BW_FD, BW_HD, CPC, LowerBound.
std::string scheme_label(Scheme s);

struct NdtPoint {
  Scheme scheme = Scheme::kCPC;
  int K = 0;
  Rational r;
  Rational value;
  std::optional<int> K_r;
  std::optional<int> t;
  std::optional<int> s;
  std::string note;  // e.g. the half-duplex conversion convention
};

// Baselines. All take 1 <= r <= K and throw ParameterError outside it.
NdtPoint ndt_uncoded(const Rational& r, int K);
NdtPoint ndt_cdc(const Rational& r, int K);
NdtPoint ndt_osl_fd(const Rational& r, int K);
/// Twice the full-duplex value; a comparison convention, not a constructed scheme.
NdtPoint ndt_osl_hd(const Rational& r, int K);
NdtPoint ndt_bw_fd(const Rational& r, int K);
/// Twice the full-duplex value; a comparison convention, not a constructed scheme.
NdtPoint ndt_bw_hd(const Rational& r, int K);

/// d'_{s,t} from the per-t' simplified fraction.
Rational dprime_simplified(int s, int t, int K_t, int K_r);
/// d'_{s,t} from the unsimplified binomial ratio.
Rational dprime_binomial(int s, int t, int K_t, int K_r);

/// Per-receiver DoF of the C(K_t, t) x C(K_r, s) cooperative X-multicast channel.
/// The s + t <= K_r - 1 branch is max{d', (s + t - 1) / K_r}, the time-division value.
Rational dof_cooperative_x(int s, int t, int K_t, int K_r);

/// Piecewise CPC NDT. Also recomputed as (1/K_r)(1 - r/K) / d and the two must match.
/// r = K returns 0 (nothing to shuffle) without a config.
NdtPoint ndt_cpc(int r, int t, int K, int K_r);

/// Minimum CPC NDT over all valid (K_r, t) with t <= max_t; 0 at r = K.
Rational cpc_min_over_configs(int r, int K, int max_t);

/// The t = 1 restriction, minimized over K_r.
NdtPoint ndt_cpc_t1(int r, int K);

/// Best K_r for a fixed t; empty when no K_r admits this t (or r = K).
std::optional<NdtPoint> ndt_cpc_fixed_t(int r, int t, int K);

/// Lower convex envelope of pts (sorted by x, distinct x) evaluated at x inside their span.
Rational lower_envelope_at(const std::vector<std::pair<Rational, Rational>>& pts, const Rational& x);

/// Envelope of the integer-r minima evaluated at a rational r.
NdtPoint ndt_cpc_fractional(const Rational& r, int K);

struct LowerBoundModel {
  int K = 0;
  Rational r;
  std::vector<std::vector<Rational>> C_table;  // [t - 1][i - 1], t in [1, floor(K/2)], i in [1, K]
  std::vector<Rational> envelope;              // [t - 1]: lowc of C_t evaluated at r (middle branch only)
  int branch = 0;                              // 1, 2 or 3
  Rational lb1;
  Rational lb2;
  Rational bound;
};

Rational lower_bound_C(int K, int t, int i);
LowerBoundModel lower_bound(const Rational& r, int K);

/// Achievable minimum over the lower bound. r = K is 0/0 and returns 1 by convention.
Rational gap_ratio(int r, int K);

struct AsymptoticsReport {
  int r = 0;
  std::vector<int> Ks;
  std::vector<Rational> cpc_t1;
  std::vector<Rational> cdc;
  std::vector<Rational> osl_hd;
  std::vector<Rational> osl_fd;
  /// First list index from which cpc_t1 strictly decreases to the end.
  std::size_t decreasing_from = 0;
  bool crossover_holds = true;  // cpc_t1 <= osl_fd wherever K >= 2(r + 1 + sqrt(r^2 + 1))
  std::vector<int> crossover_checked;
};

AsymptoticsReport asymptotics_check(int r, const std::vector<int>& Ks);

/// Exact test of K >= 2(r + 1 + sqrt(r^2 + 1)).
bool past_full_duplex_crossover(int r, int K);

std::string csv_header();
std::string csv_row(const NdtPoint& p);
/// Rationals print as decimals with 12 significant digits.
std::string format_value(const Rational& v);

}  // namespace cpc
