#include "cpc/ndt_analytics.hpp"

#include <cstdio>

namespace cpc {

namespace {

void check_range(const Rational& r, int K) {
  if (K < 1) throw ParameterError("K must be positive");
  if (r < 1 || r > K) throw ParameterError("r = " + to_string(r) + " outside [1, " + std::to_string(K) + "]");
}

NdtPoint point(Scheme s, int K, const Rational& r, Rational v, std::string note = {}) {
  NdtPoint p;
  p.scheme = s;
  p.K = K;
  p.r = r;
  p.value = std::move(v);
  p.note = std::move(note);
  return p;
}

Rational C(std::int64_t n, std::int64_t k) { return Rational(binomial_big(n, k)); }

const char* kHalfDuplexNote = "half-duplex value taken as twice the full-duplex NDT (comparison convention)";

}  // namespace

std::string scheme_label(Scheme s) {
  switch (s) {
    case Scheme::kUncodedTDMA: return "Uncoded";
    case Scheme::kCDC: return "CDC";
    case Scheme::kOSL_FD: return "OSL_FD";
    case Scheme::kOSL_HD: return "OSL_HD";
    case Scheme::kBW_FD: return "BW_FD";
    case Scheme::kBW_HD: return "BW_HD";
    case Scheme::kCPC: return "CPC";
    case Scheme::kLowerBound: return "LowerBound";
  }
  return "?";
}

NdtPoint ndt_uncoded(const Rational& r, int K) {
  check_range(r, K);
  return point(Scheme::kUncodedTDMA, K, r, 1 - r / K);
}

NdtPoint ndt_cdc(const Rational& r, int K) {
  check_range(r, K);
  return point(Scheme::kCDC, K, r, (1 - r / K) / r);
}

NdtPoint ndt_osl_fd(const Rational& r, int K) {
  check_range(r, K);
  const Rational denom = std::min(Rational(K), 2 * r);
  return point(Scheme::kOSL_FD, K, r, (1 - r / K) / denom);
}

NdtPoint ndt_osl_hd(const Rational& r, int K) {
  NdtPoint p = ndt_osl_fd(r, K);
  return point(Scheme::kOSL_HD, K, r, 2 * p.value, kHalfDuplexNote);
}

NdtPoint ndt_bw_fd(const Rational& r, int K) {
  check_range(r, K);
  const Rational local = 1 - r / K;
  if (2 * r >= K) return point(Scheme::kBW_FD, K, r, local / K);
  const Rational num = r * (K - 1) + K - r - 1;
  const Rational den = r * (K - 1) * (K - 1) + r * (K - 2);
  return point(Scheme::kBW_FD, K, r, local * num / den);
}

NdtPoint ndt_bw_hd(const Rational& r, int K) {
  NdtPoint p = ndt_bw_fd(r, K);
  return point(Scheme::kBW_HD, K, r, 2 * p.value, kHalfDuplexNote);
}

// --- DoF -------------------------------------------------------------------

namespace {
void check_dof_domain(int s, int t, int K_t, int K_r) {
  if (s < 1 || t < 1 || K_t < 1 || K_r < 1 || s > K_r || t > K_t)
    throw ParameterError("DoF domain needs 1 <= s <= K_r and 1 <= t <= K_t (s=" + std::to_string(s) +
                         ", t=" + std::to_string(t) + ", K_t=" + std::to_string(K_t) +
                         ", K_r=" + std::to_string(K_r) + ")");
}
}  // namespace

Rational dprime_simplified(int s, int t, int K_t, int K_r) {
  check_dof_domain(s, t, K_t, K_r);
  Rational best = 0;
  for (int tp = 1; tp <= t; ++tp) {
    const Rational v = 1 / (1 + Rational(K_r - s - tp + 1, s * (K_t - tp + 1)));
    best = std::max(best, v);
  }
  return best;
}

Rational dprime_binomial(int s, int t, int K_t, int K_r) {
  check_dof_domain(s, t, K_t, K_r);
  Rational best = 0;
  for (int tp = 1; tp <= t; ++tp) {
    const Rational good = C(K_r - 1, s - 1) * C(K_t, tp) * C(K_r - s, tp - 1) * tp;
    const Rational bad = C(K_r - 1, s) * C(K_r - s - 1, tp - 1) * C(K_t, tp - 1);
    best = std::max(best, good / (good + bad));
  }
  return best;
}

Rational dof_cooperative_x(int s, int t, int K_t, int K_r) {
  check_dof_domain(s, t, K_t, K_r);
  if (s + t >= K_r + 1) return 1;
  if (s + t == K_r) {
    const Rational x = C(K_r - 1, s - 1) * C(K_t, t) * t;
    return x / (x + 1);
  }
  const Rational a = dprime_simplified(s, t, K_t, K_r);
  const Rational b = dprime_binomial(s, t, K_t, K_r);
  if (a != b)
    throw InternalError("d' forms disagree: " + to_string(a) + " vs " + to_string(b));
  return std::max(a, Rational(s + t - 1, K_r));
}

// --- CPC -------------------------------------------------------------------

NdtPoint ndt_cpc(int r, int t, int K, int K_r) {
  if (r == K) {
    NdtPoint p = point(Scheme::kCPC, K, r, 0, "r = K: every node already holds all intermediate values");
    return p;
  }
  check_range(r, K);
  const int s = check_constraints(K, r, K_r, t);
  const Rational base = Rational(1, K_r) * (1 - Rational(r, K));
  Rational value;
  if (r >= K_r) {
    value = base;
  } else if (r == K_r - 1) {
    value = base * (1 + 1 / (C(r, t) * C(K - K_r, t) * t));
  } else {
    Rational tau = 0;
    for (int j = 1; j <= t; ++j)
      tau = std::max(tau, 1 / (1 + Rational(K_r + t - r - j, (r + 1 - t) * (K - K_r - j + 1))));
    value = base * std::min(1 / tau, Rational(K_r, r));
  }
  const Rational via_dof = base / dof_cooperative_x(s, t, K - K_r, K_r);
  if (value != via_dof)
    throw InternalError("CPC NDT mismatch for (r,t,K,K_r)=(" + std::to_string(r) + "," + std::to_string(t) + "," +
                        std::to_string(K) + "," + std::to_string(K_r) + "): " + to_string(value) + " vs " +
                        to_string(via_dof));
  NdtPoint p = point(Scheme::kCPC, K, r, value);
  p.K_r = K_r;
  p.t = t;
  p.s = s;
  return p;
}

Rational cpc_min_over_configs(int r, int K, int max_t) {
  check_range(r, K);
  if (r == K) return 0;
  std::optional<Rational> best;
  for (int K_r = 1; K_r <= K; ++K_r)
    for (int t = 1; t <= std::min(r, max_t); ++t) {
      const int s = r + 1 - t;
      if (s > K_r || t > K - K_r) continue;
      Rational v = ndt_cpc(r, t, K, K_r).value;
      if (!best || v < *best) best = std::move(v);
    }
  if (!best) throw InternalError("no valid CPC config for r=" + std::to_string(r) + ", K=" + std::to_string(K));
  return *best;
}

NdtPoint ndt_cpc_t1(int r, int K) {
  check_range(r, K);
  if (r == K) return ndt_cpc(r, 1, K, K);
  std::optional<NdtPoint> best;
  for (int K_r = r; K_r <= K - 1; ++K_r) {
    NdtPoint p = ndt_cpc(r, 1, K, K_r);
    if (!best || p.value < best->value) best = std::move(p);
  }
  if (!best) throw InternalError("no valid t = 1 config");
  best->note = "t = 1";
  return *best;
}

std::optional<NdtPoint> ndt_cpc_fixed_t(int r, int t, int K) {
  check_range(r, K);
  if (t < 1 || t > r) throw ParameterError("t must lie in [1, r]");
  std::optional<NdtPoint> best;
  const int s = r + 1 - t;
  for (int K_r = s; K_r <= K - t; ++K_r) {
    NdtPoint p = ndt_cpc(r, t, K, K_r);
    if (!best || p.value < best->value) best = std::move(p);
  }
  return best;
}

Rational lower_envelope_at(const std::vector<std::pair<Rational, Rational>>& pts, const Rational& x) {
  if (pts.empty()) throw ParameterError("envelope of no points");
  std::vector<std::pair<Rational, Rational>> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      // Drop b when it lies on or above the segment a -> p.
      if ((b.second - a.second) * (p.first - a.first) >= (p.second - a.second) * (b.first - a.first))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  if (x < hull.front().first || x > hull.back().first) throw ParameterError("envelope evaluated outside its span");
  if (hull.size() == 1) return hull.front().second;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const auto& [x1, y1] = hull[i];
    const auto& [x2, y2] = hull[i + 1];
    if (x1 <= x && x <= x2) return y1 + (y2 - y1) * (x - x1) / (x2 - x1);
  }
  throw InternalError("envelope search fell through");
}

NdtPoint ndt_cpc_fractional(const Rational& r, int K) {
  check_range(r, K);
  std::vector<std::pair<Rational, Rational>> pts;
  for (int rho = 1; rho <= K; ++rho) pts.emplace_back(rho, cpc_min_over_configs(rho, K, rho));
  NdtPoint p = point(Scheme::kCPC, K, r, lower_envelope_at(pts, r), "lower convex envelope over integer r");
  return p;
}

// --- converse ---------------------------------------------------------------

Rational lower_bound_C(int K, int t, int i) {
  if (i < 1 || i > t) return 0;
  return C(K - i, t - i) * (K - t) / (C(K, t) * t);
}

LowerBoundModel lower_bound(const Rational& r, int K) {
  check_range(r, K);
  if (K < 2) throw ParameterError("lower bound needs K >= 2");
  LowerBoundModel m;
  m.K = K;
  m.r = r;
  for (int t = 1; t <= K / 2; ++t) {
    std::vector<Rational> row;
    for (int i = 1; i <= K; ++i) row.push_back(lower_bound_C(K, t, i));
    m.C_table.push_back(std::move(row));
  }
  const Rational local = 1 - r / K;
  const int half_up = (K + 1) / 2;
  if (r == 1) {
    m.branch = 1;
    m.lb1 = Rational(1, K) * (2 - Rational(2, K));
  } else if (r > 1 && r < half_up) {
    m.branch = 2;
    Rational best = 0;
    for (const auto& row : m.C_table) {
      std::vector<std::pair<Rational, Rational>> pts;
      for (int i = 1; i <= K; ++i) pts.emplace_back(i, row[i - 1]);
      m.envelope.push_back(lower_envelope_at(pts, r));
      best = std::max(best, m.envelope.back());
    }
    m.lb1 = Rational(1, K) * (local + best);
  } else {
    m.branch = 3;
    m.lb1 = Rational(1, K) * local;
  }
  m.lb2 = Rational(1, K - 1) * local;
  m.bound = std::max(m.lb1, m.lb2);
  return m;
}

Rational gap_ratio(int r, int K) {
  check_range(r, K);
  if (r == K) return 1;
  return cpc_min_over_configs(r, K, r) / lower_bound(r, K).bound;
}

// --- asymptotics -------------------------------------------------------------

bool past_full_duplex_crossover(int r, int K) {
  const std::int64_t x = static_cast<std::int64_t>(K) - 2 * r - 2;
  return x >= 0 && x * x >= 4 * (static_cast<std::int64_t>(r) * r + 1);
}

AsymptoticsReport asymptotics_check(int r, const std::vector<int>& Ks) {
  AsymptoticsReport rep;
  rep.r = r;
  rep.Ks = Ks;
  for (int K : Ks) {
    rep.cpc_t1.push_back(ndt_cpc_t1(r, K).value);
    rep.cdc.push_back(ndt_cdc(r, K).value);
    rep.osl_hd.push_back(ndt_osl_hd(r, K).value);
    rep.osl_fd.push_back(ndt_osl_fd(r, K).value);
    if (past_full_duplex_crossover(r, K)) {
      rep.crossover_checked.push_back(K);
      if (rep.cpc_t1.back() > rep.osl_fd.back()) rep.crossover_holds = false;
    }
  }
  std::size_t from = rep.cpc_t1.empty() ? 0 : rep.cpc_t1.size() - 1;
  while (from > 0 && rep.cpc_t1[from - 1] > rep.cpc_t1[from]) --from;
  rep.decreasing_from = from;
  return rep;
}

// --- CSV -------------------------------------------------------------------

std::string format_value(const Rational& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", to_double(v));
  return buf;
}

std::string csv_header() { return "scheme,K,r,K_r,t,value"; }

std::string csv_row(const NdtPoint& p) {
  std::string r = boost::multiprecision::denominator(p.r) == 1 ? to_string(p.r) : format_value(p.r);
  return scheme_label(p.scheme) + "," + std::to_string(p.K) + "," + r + "," +
         (p.K_r ? std::to_string(*p.K_r) : "") + "," + (p.t ? std::to_string(*p.t) : "") + "," +
         format_value(p.value);
}

}  // namespace cpc
