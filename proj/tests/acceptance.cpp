// One PASS/FAIL line per acceptance criterion. Exit status is 0 only when the
// failing sub-checks are exactly kKnownDeviations.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpc/channel_sim.hpp"
#include "cpc/ndt_analytics.hpp"
#include "cpc/optimizer.hpp"
#include "cpc/shuffle_codec.hpp"
#include "oracles.hpp"

using namespace cpc;

namespace {

// Tolerances and limits.
const Rational kAsymptoticTolerance(2, 1000);
constexpr double kFig2Tolerance = 5e-4;
constexpr double kCdc13Tolerance = 1e-6;
constexpr double kResidualLimit = 1e-9;
constexpr double kConditionLimit = 1e8;
constexpr int kPhysicsSeeds = 100;
constexpr int kCodecTrials = 200;

// Sub-checks expected to fail. Per-receiver desired bits per partition equal
// C(K_t,t) C(K_r-1,s-1) / (C(r,t) C(K-r-1,K_r-s)) times eta1 eta2 B, which is
// B only when the two binomial products agree (true for the worked example,
// false for e.g. K=8, r=5, K_r=4, t=2 where it is 3B/5).
//
// gap(3, 6) = 5/3 divides the worked example's NDT 1/6 by the bound 1/10; the
// minimum over configurations at (3, 6) is 7/48 (K_r = 4, t = 1), so the
// optimizer-based ratio is 35/24.
const std::set<std::string> kKnownDeviations{"6.gap_3_6", "8.desired_bits_equal_B"};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;
  std::vector<std::pair<std::string, bool>> checks;
  std::vector<std::string> notes;
  double elapsed_s = 0;

  void check(const std::string& name, bool ok) { checks.emplace_back(std::to_string(id) + "." + name, ok); }
  void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

SystemParams params(int K, std::int64_t N, std::int64_t Q, int r, std::uint64_t B) {
  return SystemParams::make(K, N, Q, r, B);
}

void criterion1(Criterion& c) {
  const auto p = params(6, 20, 6, 3, 48);
  const ShuffleConfig cfg = validate_config(p, 3, 2);
  const PlacementMap pm = build_placement(p);
  const IVStore store = map_phase(pm, 0);
  const ShuffleScheme scheme(cfg, pm);
  const auto all = encode_all(scheme, store);
  std::size_t messages = 0;
  for (const auto& per : all) messages += per.size();
  c.check("partitions_20", scheme.partitions().size() == 20);
  c.check("messages_180", messages == 180);
  const ExchangeResult ideal = run_ideal_exchange(scheme, store);
  c.check("ideal_verify", ideal.ok && ideal.ivs_checked == 60);
  const VerifyResult chan = end_to_end_verify(p, cfg, 0);
  c.check("channel_verify", chan.ok && chan.ivs_checked == 60);
  const PartitionLoad load = per_partition_load(cfg);
  c.check("R_p_1_120", load.R_p == Rational(1, 120) && load.R_p_counted == Rational(1, 120));
  c.check("total_ndt_1_6", load.total / chan.min_partition_dof == Rational(1, 6) &&
                               ndt_cpc(3, 2, 6, 3).value == Rational(1, 6));
  c.note("R_p=" + to_string(load.R_p) + " NDT=" + to_string(ndt_cpc(3, 2, 6, 3).value));
}

void criterion2(Criterion& c) {
  c.check("cdc_2_50", ndt_cdc(2, 50).value == Rational(48, 100));
  const OptimumParams best = brute_force_min(2, 50);
  c.check("cpc_2_50", std::abs(to_double(best.best_value) - 0.0544) <= kFig2Tolerance);
  const Rational cdc13 = ndt_cdc(13, 50).value;
  c.check("cdc_13_50", std::abs(to_double(cdc13) - 0.056923) <= kCdc13Tolerance);
  c.check("cpc_below_cdc13", best.best_value < cdc13);
  c.note("cpc(2,50)=" + fmt(to_double(best.best_value)) + " cdc(13,50)=" + fmt(to_double(cdc13)));
}

void criterion3(Criterion& c) {
  const ClosedForm cf = closed_form_terms(5, 8);
  c.check("ndt1", cf.ndt1 && *cf.ndt1 == Rational(65625, 1000000) && cf.t_star == 2);
  c.check("ndt2", cf.ndt2 == Rational(6875, 100000) && cf.K_r_star == 6);
  const OptimumParams f = closed_form_min(5, 8);
  c.check("min_is_ndt1", f.branch == Branch::kNDT1 && cf.ndt1 && f.best_value == *cf.ndt1);
  c.check("brute_agrees", brute_force_min(5, 8).best_value == f.best_value);
}

void criterion4(Criterion& c) {
  const CrossReport rep = cross_validate(30);
  c.check("cells_435", rep.cells.size() == 435);
  c.check("zero_discrepancies", rep.discrepancies == 0);
  c.note(std::to_string(rep.cells.size()) + " cells, " + std::to_string(rep.discrepancies) + " discrepancies");
}

void criterion5(Criterion& c) {
  bool cdc = true, osl = true, bw = true, cross = true;
  int crossed = 0;
  for (int K = 2; K <= 30; ++K)
    for (int r = 1; r <= K - 1; ++r) {
      const Rational cpc = ndt_cpc_t1(r, K).value;
      const Rational d_cdc = ndt_cdc(r, K).value;
      cdc = cdc && cpc <= d_cdc;
      osl = osl && d_cdc <= ndt_osl_hd(r, K).value;
      bw = bw && cpc <= ndt_bw_hd(r, K).value;
      if (past_full_duplex_crossover(r, K)) {
        ++crossed;
        cross = cross && cpc <= ndt_osl_fd(r, K).value;
      }
    }
  c.check("cpc_le_cdc", cdc);
  c.check("cdc_le_osl_hd", osl);
  c.check("cpc_le_bw_hd", bw);
  c.check("full_duplex_crossover", cross && crossed > 0);
  c.note(std::to_string(crossed) + " cells past the full-duplex crossover");
}

void criterion6(Criterion& c) {
  bool sandwich = true, gap = true;
  Rational worst = 0;
  for (int K = 2; K <= 24; ++K)
    for (int r = 1; r <= K - 1; ++r) {
      const Rational lb = lower_bound(r, K).bound;
      const Rational best = brute_force_min(r, K).best_value;
      sandwich = sandwich && lb <= best;
      const Rational g = gap_ratio(r, K);
      gap = gap && g < 3;
      worst = std::max(worst, g);
    }
  c.check("sandwich", sandwich);
  c.check("gap_below_3", gap);
  c.check("bound_3_6", lower_bound(3, 6).bound == Rational(1, 10));
  c.check("gap_3_6", gap_ratio(3, 6) == Rational(5, 3));
  c.note("max gap " + fmt(to_double(worst)) + ", gap(3,6)=" + to_string(gap_ratio(3, 6)));
}

void criterion7(Criterion& c) {
  struct Fixture {
    SystemParams p;
    ShuffleConfig cfg;
  };
  const auto pa = params(6, 20, 6, 3, 48);
  const auto pb = params(8, 56, 8, 5, 80);
  const std::vector<Fixture> case_a{{pa, validate_config(pa, 3, 2)}, {pb, validate_config(pb, 4, 2)}};
  double residual = 0, condition = 0;
  bool ok = true, dof = true;
  int resamples = 0;
  for (const Fixture& f : case_a)
    for (int seed = 0; seed < kPhysicsSeeds; ++seed) {
      const VerifyResult v = end_to_end_verify(f.p, f.cfg, seed);
      ok = ok && v.ok;
      dof = dof && v.min_partition_dof == 1 && v.max_partition_dof == 1;
      residual = std::max(residual, v.report.max_residual);
      condition = std::max(condition, v.report.max_condition);
      resamples += v.report.resamples;
    }
  c.check("case_a_recovered", ok);
  c.check("residual", residual < kResidualLimit);
  c.check("condition", condition < kConditionLimit && resamples == 0);
  c.check("case_a_dof_1", dof);

  const auto pc = params(8, 28, 8, 2, 160);
  const ShuffleConfig cc = validate_config(pc, 5, 1);
  const VerifyResult v = end_to_end_verify(pc, cc, 0);
  c.check("case_c_dof_2_5", v.ok && partition_slots(cc) == 30 && v.min_partition_dof == Rational(2, 5) &&
                                v.max_partition_dof == Rational(2, 5));
  c.note("max residual " + fmt(std::max(residual, v.report.max_residual)) + ", max condition " + fmt(condition) +
         ", redraws " + std::to_string(resamples));
}

void criterion8(Criterion& c) {
  std::mt19937_64 rng(8);
  bool injective = true, per_message = true, involution = true, equal_B = true, scaled = true;
  std::string witness;
  for (int trial = 0; trial < kCodecTrials; ++trial) {
    const auto rc = oracle::random_config(rng, 8);
    const auto p = params(rc.K, rc.N, rc.Q, rc.r, rc.B);
    const ShuffleConfig cfg = validate_config(p, rc.K_r, rc.t);
    const PlacementMap pm = build_placement(p);
    const IVStore store = map_phase(pm, trial);
    const ShuffleScheme scheme(cfg, pm);
    std::map<SegmentId, int> seen;
    std::size_t total = 0;
    for (const auto& per : encode_all(scheme, store))
      for (const CodedMessage& m : per) {
        NodeSet dests;
        for (const SegmentId& id : m.parts) {
          dests = dests.with(id.dest);
          injective = injective && ++seen[id] == 1;
          const Bytes got = decode_segment(scheme, m, m.payload, store, id.dest);
          Bytes twice = m.payload;
          for (std::size_t i = 0; i < twice.size(); ++i) twice[i] ^= got[i] ^ got[i];
          involution = involution && got == local_segment(scheme, store, id.U.front(), id) && twice == m.payload;
        }
        per_message = per_message && m.parts.size() == static_cast<std::size_t>(cfg.s) && dests == m.D;
        ++total;
      }
    injective = injective && seen.size() == total * cfg.s;
    const PartitionLoad load = per_partition_load(cfg);
    scaled = scaled && load.desired_bits == load.R_p * p.N * p.Q * p.B;
    if (load.desired_bits != Rational(p.B) && equal_B) {
      equal_B = false;
      witness = "K=" + std::to_string(rc.K) + " r=" + std::to_string(rc.r) + " K_r=" + std::to_string(rc.K_r) +
                " t=" + std::to_string(rc.t) + " N=" + std::to_string(rc.N) + " Q=" + std::to_string(rc.Q) +
                ": desired = " + to_string(load.desired_bits / p.B) + " B";
    }
  }
  c.check("injective", injective);
  c.check("s_segments_per_message", per_message);
  c.check("xor_involution", involution);
  c.check("desired_bits_equal_B", equal_B);
  c.check("desired_bits_equal_R_p_NQB", scaled);
  if (!witness.empty()) c.note("desired bits != B at " + witness);
}

void criterion9(Criterion& c) {
  std::vector<int> Ks;
  for (int K = 6; K <= 60; ++K) Ks.push_back(K);
  for (int K = 70; K <= 500; K += 10) Ks.push_back(K);
  const AsymptoticsReport rep = asymptotics_check(2, Ks);
  c.check("strictly_decreasing", rep.decreasing_from == 0);
  c.check("final_below_0_01", rep.cpc_t1.back() < Rational(1, 100));
  c.check("cdc_2_500", abs(ndt_cdc(2, 500).value - Rational(1, 2)) <= kAsymptoticTolerance);
  c.note("cpc_t1(2,500)=" + fmt(to_double(rep.cpc_t1.back())));
}

}  // namespace

int main() {
  std::vector<Criterion> cs{
      {1, "worked example", 5, {}, {}},
      {2, "figure spot values", 1, {}, {}},
      {3, "optimizer fixture r=5 K=8", 1, {}, {}},
      {4, "closed form = brute force, K <= 30", 30, {}, {}},
      {5, "dominance suite", 10, {}, {}},
      {6, "lower bound sandwich and gap", 10, {}, {}},
      {7, "neutralization physics", 60, {}, {}},
      {8, "codec invariants", 30, {}, {}},
      {9, "asymptotics r=2", 5, {}, {}},
  };
  const std::vector<std::function<void(Criterion&)>> bodies{criterion1, criterion2, criterion3,
                                                            criterion4, criterion5, criterion6,
                                                            criterion7, criterion8, criterion9};

  std::set<std::string> failing;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    Criterion& c = cs[i];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      bodies[i](c);
    } catch (const std::exception& e) {
      c.check("no_exception", false);
      c.note(std::string("exception: ") + e.what());
    }
    c.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.check("time_limit", c.elapsed_s < c.time_limit_s);

    std::vector<std::string> failed;
    for (const auto& [name, ok] : c.checks)
      if (!ok) {
        failed.push_back(name);
        failing.insert(name);
      }
    std::ostringstream line;
    line << (failed.empty() ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.title << " ("
         << fmt(c.elapsed_s) << " s)";
    for (const auto& n : c.notes) line << "; " << n;
    for (const auto& f : failed)
      line << "; failed " << f << (kKnownDeviations.count(f) ? " [known deviation]" : "");
    std::printf("%s\n", line.str().c_str());
  }

  std::vector<std::string> unexpected_fail, unexpected_pass;
  for (const auto& f : failing)
    if (!kKnownDeviations.count(f)) unexpected_fail.push_back(f);
  for (const auto& k : kKnownDeviations)
    if (!failing.count(k)) unexpected_pass.push_back(k);
  for (const auto& f : unexpected_fail) std::printf("unexpected failure: %s\n", f.c_str());
  for (const auto& k : unexpected_pass) std::printf("known deviation no longer reproduces: %s\n", k.c_str());
  const bool ok = unexpected_fail.empty() && unexpected_pass.empty();
  std::printf("%s\n", ok ? "acceptance: failures match the known-deviation list" : "acceptance: MISMATCH");
  return ok ? 0 : 1;
}
