#include "cpc/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cpc/parallel.hpp"
#include "cpc/placement.hpp"

namespace cpc {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

cplx det_small(const Eigen::MatrixXcd& m) {
  switch (m.rows()) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      return m.partialPivLu().determinant();
  }
}

Bytes corrupted(Bytes b) {
  if (!b.empty()) b[0] ^= 0x80;
  return b;
}

/// One message (or piece of one) carried by a neutralization block.
struct BlockItem {
  NodeSet D;
  cplx x;
};

/// The s + t >= K_r + 1 construction on an arbitrary receiver set: every
/// item's precoder nulls it at receivers \ D, and each receiver solves a
/// Gamma x Gamma system for the Gamma items it wants. Returns the estimate of
/// item i at receiver j as est[j][i].
std::map<int, std::map<std::size_t, cplx>> serve_block(const ChannelRealization& ch, int slot0,
                                                       const NodeSet& receivers, int s,
                                                       const NodeSet& active_tx,
                                                       const std::vector<BlockItem>& items,
                                                       const SimOptions& opt, DeliveryReport& rep) {
  const int Kr = receivers.size();
  const int gamma = static_cast<int>(binomial(Kr - 1, s - 1));
  if (items.size() != binomial(Kr, s)) throw InternalError("block does not carry C(K_r, s) items");

  // Precoders per (item, slot).
  std::vector<std::vector<Eigen::VectorXcd>> w(items.size(), std::vector<Eigen::VectorXcd>(gamma));
  for (std::size_t i = 0; i < items.size(); ++i)
    for (int d = 0; d < gamma; ++d) w[i][d] = neutralizing_precoder(ch, slot0 + d, active_tx, receivers - items[i].D);

  const std::vector<int> tx = active_tx.members();
  auto gain = [&](int j, std::size_t i, int d) {
    cplx acc = 0;
    for (std::size_t m = 0; m < tx.size(); ++m) acc += ch.h(j, tx[m], slot0 + d) * w[i][d](m);
    return acc;
  };
  auto scale = [&](int j, std::size_t i, int d) {
    double hn = 0;
    for (int m : tx) hn += std::norm(ch.h(j, m, slot0 + d));
    return std::sqrt(hn) * w[i][d].norm();
  };

  std::mt19937_64 noise_rng(mix(ch.seed() ^ opt.noise_seed, static_cast<std::uint64_t>(slot0)));
  const double sigma = opt.snr_db ? std::sqrt(0.5 * std::pow(10.0, -*opt.snr_db / 10.0)) : 0.0;
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::map<int, std::map<std::size_t, cplx>> est;
  for (int j : receivers) {
    std::vector<std::size_t> want;
    for (std::size_t i = 0; i < items.size(); ++i)
      if (items[i].D.contains(j)) want.push_back(i);
    if (static_cast<int>(want.size()) != gamma) throw InternalError("receiver wants a wrong item count");

    Eigen::MatrixXcd M(gamma, gamma);
    Eigen::VectorXcd y(gamma);
    for (int d = 0; d < gamma; ++d) {
      cplx yd = 0;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const cplx g = gain(j, i, d);
        const double rel = std::abs(g) / scale(j, i, d);
        if (items[i].D.contains(j)) {
          if (rep.min_signal == 0.0 || rel < rep.min_signal) rep.min_signal = rel;
          if (rel < 1e-12) throw ResampleAdvisory("intended gain vanished at receiver " + std::to_string(j));
        } else {
          rep.max_residual = std::max(rep.max_residual, rel);
        }
        yd += g * items[i].x;
      }
      if (sigma > 0) yd += cplx(sigma * gauss(noise_rng), sigma * gauss(noise_rng));
      y(d) = yd;
      for (int c = 0; c < gamma; ++c) M(d, c) = gain(j, want[c], d);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    if (!(cond < kConditionGuard))
      throw ResampleAdvisory("receive matrix at node " + std::to_string(j) + " has condition " +
                             std::to_string(cond));
    rep.max_condition = std::max(rep.max_condition, cond);
    const Eigen::VectorXcd xhat = svd.solve(y);
    for (int c = 0; c < gamma; ++c) {
      const double err = std::abs(xhat(c) - items[want[c]].x);
      rep.max_symbol_error = std::max(rep.max_symbol_error, err);
      rep.symbol_mse += err * err;
      ++rep.symbols;
      est[j][want[c]] = xhat(c);
    }
    rep.symbols_per_receiver[j] += gamma;
  }
  rep.slots += gamma;
  return est;
}

void finish_report(DeliveryReport& rep, const Partition& partition) {
  if (rep.slots == 0) return;
  std::uint64_t least = UINT64_MAX;
  for (int j : partition.rx) least = std::min(least, rep.symbols_per_receiver[j]);
  rep.measured_dof = Rational(BigInt(least), BigInt(rep.slots));
}

}  // namespace

ChannelRealization draw_channel(int K, int slots, std::uint64_t seed) {
  if (slots < 1) throw ParameterError("channel needs at least one slot");
  if (K < 1) throw ParameterError("channel needs at least one node");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  std::vector<cplx> g(static_cast<std::size_t>(slots) * K * K);
  for (auto& v : g) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v = {re, im};
  }
  return ChannelRealization(K, slots, seed, std::move(g));
}

Eigen::VectorXcd neutralizing_precoder(const ChannelRealization& channel, int d, const NodeSet& active_tx,
                                       const NodeSet& null_rx) {
  const int n = active_tx.size();
  if (n != null_rx.size() + 1)
    throw ParameterError("precoder needs |active_tx| = |null_rx| + 1, got " + std::to_string(n) + " and " +
                         std::to_string(null_rx.size()));
  if (d < 0 || d >= channel.slots()) throw ParameterError("slot out of range");
  const std::vector<int> tx = active_tx.members();
  const std::vector<int> rx = null_rx.members();
  Eigen::VectorXcd w(n);
  Eigen::MatrixXcd minor(n - 1, n - 1);
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n - 1; ++i)
      for (int c = 0, cc = 0; c < n; ++c) {
        if (c == col) continue;
        minor(i, cc++) = channel.h(rx[i], tx[c], d);
      }
    // Bottom row is row n, so the sign is (-1)^(n + col + 1) with 1-based col.
    const double sign = ((n + col + 1) % 2 == 0) ? 1.0 : -1.0;
    w(col) = sign * det_small(minor);
  }
  return w;
}

cplx payload_symbol(const Bytes& payload) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : payload) h = (h ^ b) * 0x100000001b3ULL;
  h = mix(h, payload.size());
  const double phase = 2.0 * M_PI * static_cast<double>(h >> 11) / 9007199254740992.0;
  return std::polar(1.0, phase);
}

void DeliveryReport::merge(const DeliveryReport& o) {
  const bool first = slots == 0;
  for (const auto& [j, c] : o.symbols_per_receiver) symbols_per_receiver[j] += c;
  slots += o.slots;
  measured_dof = first ? o.measured_dof : std::min(measured_dof, o.measured_dof);
  max_condition = std::max(max_condition, o.max_condition);
  max_residual = std::max(max_residual, o.max_residual);
  if (min_signal == 0.0 || (o.min_signal > 0.0 && o.min_signal < min_signal)) min_signal = o.min_signal;
  max_symbol_error = std::max(max_symbol_error, o.max_symbol_error);
  symbol_mse = (symbol_mse * symbols + o.symbol_mse * o.symbols) /
               std::max<std::uint64_t>(1, symbols + o.symbols);
  symbols += o.symbols;
  failed_symbols += o.failed_symbols;
  resamples += o.resamples;
  delivered.insert(o.delivered.begin(), o.delivered.end());
}

Regime regime_of(const ShuffleConfig& c) {
  if (c.s + c.t >= c.K_r + 1) return Regime::kCaseA;
  if (c.s + c.t == c.K_r) return Regime::kCaseB;
  return Regime::kCaseC;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kCaseA:
      return "neutralization (s+t >= K_r+1)";
    case Regime::kCaseB:
      return "alignment (s+t = K_r)";
    case Regime::kCaseC:
      return "time division (s+t <= K_r-1)";
  }
  return "unknown";
}

std::uint64_t partition_slots(const ShuffleConfig& c) {
  switch (regime_of(c)) {
    case Regime::kCaseA:
      return binomial(c.K_t(), c.t) * binomial(c.K_r - 1, c.s - 1);
    case Regime::kCaseC:
      return binomial(c.K_r, c.r()) * binomial(c.K_t(), c.t) * binomial(c.r() - 1, c.s - 1);
    case Regime::kCaseB:
      break;
  }
  throw RegimeNotSimulated("s + t = K_r is not simulated");
}

DeliveryReport simulate_partition_case_a(const Partition& partition, const ShuffleConfig& cfg,
                                         const ChannelRealization& channel,
                                         const std::vector<CodedMessage>& messages, const SimOptions& opt) {
  if (regime_of(cfg) != Regime::kCaseA) throw ParameterError("neutralization needs s + t >= K_r + 1");
  if (channel.slots() < static_cast<int>(partition_slots(cfg)))
    throw ParameterError("channel realization has too few slots");
  DeliveryReport rep;
  int slot0 = 0;
  for (const NodeSet& B : enum_subsets(partition.tx, cfg.t)) {
    std::vector<const CodedMessage*> group;
    std::vector<BlockItem> items;
    for (const CodedMessage& m : messages)
      if (m.p == partition.index && m.B == B) {
        group.push_back(&m);
        items.push_back({m.D, payload_symbol(m.payload)});
      }
    // The lexicographically first K_r - s + 1 members of B transmit.
    NodeSet active;
    int left = cfg.K_r - cfg.s + 1;
    for (int m : B)
      if (left-- > 0) active = active.with(m);
    auto est = serve_block(channel, slot0, partition.rx, cfg.s, active, items, opt, rep);
    for (const auto& [j, per] : est)
      for (const auto& [i, xhat] : per) {
        const bool ok = std::abs(xhat - items[i].x) < opt.tolerance;
        if (!ok) ++rep.failed_symbols;
        const CodedMessage& m = *group[i];
        rep.delivered[{partition.index, j, m.D.mask(), m.B.mask()}] = ok ? m.payload : corrupted(m.payload);
      }
    slot0 += static_cast<int>(binomial(cfg.K_r - 1, cfg.s - 1));
  }
  finish_report(rep, partition);
  return rep;
}

DeliveryReport simulate_case_c_timedivision(const Partition& partition, const ShuffleConfig& cfg,
                                            const ChannelRealization& channel,
                                            const std::vector<CodedMessage>& messages, const SimOptions& opt) {
  if (regime_of(cfg) != Regime::kCaseC) throw ParameterError("time division needs s + t <= K_r - 1");
  if (channel.slots() < static_cast<int>(partition_slots(cfg)))
    throw ParameterError("channel realization has too few slots");
  const int r = cfg.r();
  const std::size_t sigma = binomial(cfg.K_r - cfg.s, cfg.t - 1);

  std::map<std::pair<std::uint64_t, std::uint64_t>, const CodedMessage*> by_key;
  for (const CodedMessage& m : messages)
    if (m.p == partition.index) by_key[{m.D.mask(), m.B.mask()}] = &m;

  auto chunk_of = [&](const Bytes& payload, std::size_t idx) {
    const std::size_t len = payload.size();
    return Bytes(payload.begin() + idx * len / sigma, payload.begin() + (idx + 1) * len / sigma);
  };
  auto piece_index = [&](const NodeSet& D, const NodeSet& E) {
    const auto pieces = enum_subsets(partition.rx - D, cfg.t - 1);
    return static_cast<std::size_t>(std::find(pieces.begin(), pieces.end(), E) - pieces.begin());
  };

  // assembled[(j, D, B)][piece] holds what j recovered of each piece.
  std::map<std::tuple<int, std::uint64_t, std::uint64_t>, std::vector<std::optional<Bytes>>> assembled;
  DeliveryReport rep;
  int slot0 = 0;
  const int gamma = static_cast<int>(binomial(r - 1, cfg.s - 1));
  for (const NodeSet& G : enum_subsets(partition.rx, r)) {
    for (const NodeSet& B : enum_subsets(partition.tx, cfg.t)) {
      std::vector<BlockItem> items;
      std::vector<std::pair<const CodedMessage*, std::size_t>> src;
      for (const NodeSet& D : enum_subsets(G, cfg.s)) {
        auto it = by_key.find({D.mask(), B.mask()});
        if (it == by_key.end()) throw InternalError("missing message for D=" + D.to_string());
        const std::size_t idx = piece_index(D, G - D);
        items.push_back({D, payload_symbol(chunk_of(it->second->payload, idx))});
        src.emplace_back(it->second, idx);
      }
      // r receivers and s + t = r + 1, so all of B transmits.
      auto est = serve_block(channel, slot0, G, cfg.s, B, items, opt, rep);
      for (const auto& [j, per] : est)
        for (const auto& [i, xhat] : per) {
          const auto& [msg, idx] = src[i];
          const bool ok = std::abs(xhat - items[i].x) < opt.tolerance;
          if (!ok) ++rep.failed_symbols;
          auto& slotv = assembled[{j, msg->D.mask(), msg->B.mask()}];
          slotv.resize(sigma);
          slotv[idx] = ok ? chunk_of(msg->payload, idx) : corrupted(chunk_of(msg->payload, idx));
        }
      slot0 += gamma;
    }
  }
  for (const auto& [key, pieces] : assembled) {
    const auto& [j, D, B] = key;
    Bytes whole;
    for (const auto& piece : pieces) {
      if (!piece) throw InternalError("piece never scheduled for receiver " + std::to_string(j));
      whole.insert(whole.end(), piece->begin(), piece->end());
    }
    rep.delivered[{partition.index, j, D, B}] = std::move(whole);
  }
  finish_report(rep, partition);
  return rep;
}

VerifyResult end_to_end_verify(const SystemParams& params, const ShuffleConfig& config, std::uint64_t seed,
                               const SimOptions& options, bool fault) {
  if (params.K != config.params.K || params.r != config.params.r || params.N != config.params.N ||
      params.Q != config.params.Q || params.B != config.params.B)
    throw ParameterError("config was built for different system parameters");
  const Regime regime = regime_of(config);
  if (regime == Regime::kCaseB) throw RegimeNotSimulated("s + t = K_r is only covered analytically");

  const PlacementMap placement = build_placement(params);
  const IVStore store = map_phase(placement, seed);
  const ShuffleScheme scheme(config, placement);
  scheme.segment_bytes();
  auto messages = encode_all(scheme, store);
  if (fault && !messages.empty() && !messages.front().empty()) messages.front().front().payload[0] ^= 0x01;

  const std::size_t P = scheme.partitions().size();
  std::vector<DeliveryReport> reports(P);
  const int slots = static_cast<int>(partition_slots(config));
  parallel_for(P, [&](std::size_t i) {
    const Partition& part = scheme.partitions()[i];
    for (int attempt = 0;; ++attempt) {
      const ChannelRealization ch = draw_channel(params.K, slots, mix(mix(seed, part.index), attempt));
      try {
        reports[i] = regime == Regime::kCaseA
                         ? simulate_partition_case_a(part, config, ch, messages[i], options)
                         : simulate_case_c_timedivision(part, config, ch, messages[i], options);
        reports[i].resamples = attempt;
        return;
      } catch (const ResampleAdvisory&) {
        if (attempt >= 1) throw;
      }
    }
  });

  VerifyResult out;
  for (std::size_t i = 0; i < P; ++i) {
    if (i == 0) {
      out.min_partition_dof = out.max_partition_dof = reports[i].measured_dof;
    } else {
      out.min_partition_dof = std::min(out.min_partition_dof, reports[i].measured_dof);
      out.max_partition_dof = std::max(out.max_partition_dof, reports[i].measured_dof);
    }
    out.report.merge(reports[i]);
  }
  Delivery delivery = [&](int j, const CodedMessage& m) -> Bytes {
    auto it = out.report.delivered.find({m.p, j, m.D.mask(), m.B.mask()});
    if (it == out.report.delivered.end())
      throw InternalError("receiver " + std::to_string(j) + " never heard the message for D=" +
                          m.D.to_string() + ", B=" + m.B.to_string());
    return it->second;
  };
  const ExchangeResult ex = run_exchange(scheme, store, messages, delivery);
  out.ok = ex.ok;
  out.witness = ex.witness;
  out.ivs_checked = ex.ivs_checked;
  out.messages = ex.messages;
  return out;
}

}  // namespace cpc
