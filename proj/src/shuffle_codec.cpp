#include "cpc/shuffle_codec.hpp"

#include <algorithm>

#include "cpc/parallel.hpp"

namespace cpc {

std::string SegmentId::to_string() const {
  return "v[d" + std::to_string(dest) + "," + (U - B).to_string() + "](p=" + std::to_string(p) +
         ",B=" + B.to_string() + ")";
}

const SegmentId& CodedMessage::part_for(int j) const {
  for (const SegmentId& id : parts)
    if (id.dest == j) return id;
  throw NotIntended("node " + std::to_string(j) + " is not a destination of the message for D=" +
                    D.to_string() + ", B=" + B.to_string() + " in partition " + std::to_string(p));
}

void XorCounter::merge(const XorCounter& other) {
  if (encode_bits.size() < other.encode_bits.size()) {
    encode_bits.resize(other.encode_bits.size(), 0);
    decode_bits.resize(other.decode_bits.size(), 0);
  }
  for (std::size_t i = 0; i < other.encode_bits.size(); ++i) {
    encode_bits[i] += other.encode_bits[i];
    decode_bits[i] += other.decode_bits[i];
  }
}

// --- ShuffleScheme ---------------------------------------------------------

ShuffleScheme::ShuffleScheme(const ShuffleConfig& config, const PlacementMap& placement)
    : config_(config), placement_(placement) {
  // Re-validate so a hand-built config cannot slip through.
  validate_config(config.params, config.K_r, config.t);
  const int K = config.K(), r = config.r();
  partitions_ = enum_partitions(K, config.K_t());
  segments_per_block_ = binomial(r, config.t) * binomial(K - r - 1, config.K_r - config.s);
  block_bits_ = static_cast<std::uint64_t>(placement.eta1 * placement.eta2) * config.params.B;
  if (segments_per_block_ == 0) throw InternalError("segment count is zero for a valid config");
}

std::size_t ShuffleScheme::segment_bytes() const {
  if (block_bits_ % (8 * segments_per_block_) != 0)
    throw InfeasibleInstance("eta1*eta2*B = " + std::to_string(block_bits_) +
                             " bits do not split into " + std::to_string(segments_per_block_) +
                             " whole-byte segments; choose B as a multiple of " +
                             std::to_string(8 * segments_per_block_));
  return block_bits_ / (8 * segments_per_block_);
}

std::vector<std::pair<int, NodeSet>> ShuffleScheme::admissible_pairs(int j, const NodeSet& U) const {
  const int K = config_.K();
  const int t = config_.t;
  const int extra = config_.K_t() - t;
  const NodeSet others = NodeSet::range(1, K) - U.with(j);
  std::vector<std::pair<int, NodeSet>> out;
  out.reserve(segments_per_block_);
  for (const NodeSet& B : enum_subsets(U, t)) {
    const std::size_t first = out.size();
    for (const NodeSet& E : enum_subsets(others, extra)) out.emplace_back(partition_index(K, B | E), B);
    std::sort(out.begin() + first, out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return out;
}

std::size_t ShuffleScheme::segment_position(const SegmentId& id) const {
  const auto pairs = admissible_pairs(id.dest, id.U);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].first == id.p && pairs[i].second == id.B) return i;
  throw InternalError("segment " + id.to_string() + " is not admissible");
}

bool ShuffleScheme::is_admissible(const SegmentId& id) const {
  const int K = config_.K();
  if (id.dest < 1 || id.dest > K || id.U.contains(id.dest)) return false;
  if (id.U.size() != config_.r() || id.B.size() != config_.t || !id.B.is_subset_of(id.U)) return false;
  if (id.p < 1 || id.p > static_cast<int>(partitions_.size())) return false;
  const Partition& part = partition(id.p);
  return id.B.is_subset_of(part.tx) && (id.U - id.B).with(id.dest).is_subset_of(part.rx);
}

SegmentId ShuffleScheme::segment_for(int j, const NodeSet& D, int p, const NodeSet& B) const {
  return SegmentId{j, D.without(j) | B, p, B};
}

std::uint64_t ShuffleScheme::messages_per_partition() const {
  return binomial(config_.K_t(), config_.t) * binomial(config_.K_r, config_.s);
}

std::uint64_t ShuffleScheme::desired_per_receiver() const {
  return binomial(config_.K_t(), config_.t) * binomial(config_.K_r - 1, config_.s - 1);
}

// --- segments --------------------------------------------------------------

namespace {

/// Copies [offset, offset + len) of the block v_{d_j,U} (outputs of j ascending,
/// then files of U ascending) as seen by holder.
Bytes read_block_range(const ShuffleScheme& scheme, const IVStore& store, int holder, int j,
                       const NodeSet& U, std::size_t offset, std::size_t len) {
  const PlacementMap& pm = scheme.placement();
  const std::size_t iv_bytes = pm.params.B / 8;
  const auto files = pm.files_of_subset(U);
  const auto& outputs = pm.outputs_of(j);
  Bytes out;
  out.reserve(len);
  std::size_t pos = offset;
  const std::size_t end = offset + len;
  while (pos < end) {
    const std::size_t iv = pos / iv_bytes;
    const std::size_t within = pos % iv_bytes;
    const std::int64_t q = outputs.at(iv / files.size());
    const std::int64_t n = files.at(iv % files.size());
    const auto& local = store.node(holder);
    auto it = local.find({q, n});
    if (it == local.end())
      throw SideInformationMissing("node " + std::to_string(holder) + " lacks v_{" +
                                   std::to_string(q) + "," + std::to_string(n) + "}");
    const std::size_t take = std::min(iv_bytes - within, end - pos);
    out.insert(out.end(), it->second.begin() + within, it->second.begin() + within + take);
    pos += take;
  }
  return out;
}

void xor_into(Bytes& acc, const Bytes& other) {
  if (acc.size() != other.size()) throw InternalError("XOR of unequal-length byte strings");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] ^= other[i];
}

}  // namespace

Bytes local_segment(const ShuffleScheme& scheme, const IVStore& store, int holder, const SegmentId& id) {
  if (!id.U.contains(holder))
    throw SideInformationMissing("node " + std::to_string(holder) + " is outside the storage set of " +
                                 id.to_string());
  const std::size_t len = scheme.segment_bytes();
  const std::size_t pos = scheme.segment_position(id);
  return read_block_range(scheme, store, holder, id.dest, id.U, pos * len, len);
}

std::map<SegmentId, Bytes> segment_ivs(const ShuffleScheme& scheme, const IVStore& store) {
  const ShuffleConfig& cfg = scheme.config();
  const int K = cfg.K();
  const std::size_t len = scheme.segment_bytes();
  std::map<SegmentId, Bytes> out;
  for (int j = 1; j <= K; ++j) {
    for (const NodeSet& U : enum_subsets(NodeSet::range(1, K).without(j), cfg.r())) {
      const auto pairs = scheme.admissible_pairs(j, U);
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        SegmentId id{j, U, pairs[i].first, pairs[i].second};
        out.emplace(id, read_block_range(scheme, store, U.front(), j, U, i * len, len));
      }
    }
  }
  return out;
}

std::vector<CodedMessage> encode_partition(const ShuffleScheme& scheme, const IVStore& store, int p,
                                           XorCounter* counter) {
  const ShuffleConfig& cfg = scheme.config();
  const Partition& part = scheme.partition(p);
  const std::uint64_t seg_bits = 8 * scheme.segment_bytes();
  std::vector<CodedMessage> out;
  out.reserve(scheme.messages_per_partition());
  for (const NodeSet& B : enum_subsets(part.tx, cfg.t)) {
    for (const NodeSet& D : enum_subsets(part.rx, cfg.s)) {
      CodedMessage msg{p, D, B, {}, {}};
      for (int j : D) msg.parts.push_back(scheme.segment_for(j, D, p, B));
      bool first_tx = true;
      for (int m : B) {
        Bytes acc = local_segment(scheme, store, m, msg.parts.front());
        for (std::size_t i = 1; i < msg.parts.size(); ++i)
          xor_into(acc, local_segment(scheme, store, m, msg.parts[i]));
        if (counter) counter->encode_bits.at(m - 1) += (cfg.s - 1) * seg_bits;
        if (first_tx) {
          msg.payload = std::move(acc);
          first_tx = false;
        } else if (acc != msg.payload) {
          throw InternalError("cooperating transmitters disagree on the payload for D=" + D.to_string() +
                              ", B=" + B.to_string());
        }
      }
      out.push_back(std::move(msg));
    }
  }
  return out;
}

std::vector<CodedMessage> encode_partition(const ShuffleScheme& scheme,
                                           const std::map<SegmentId, Bytes>& segments, int p) {
  const ShuffleConfig& cfg = scheme.config();
  const Partition& part = scheme.partition(p);
  std::vector<CodedMessage> out;
  for (const NodeSet& B : enum_subsets(part.tx, cfg.t)) {
    for (const NodeSet& D : enum_subsets(part.rx, cfg.s)) {
      CodedMessage msg{p, D, B, {}, {}};
      for (int j : D) {
        SegmentId id = scheme.segment_for(j, D, p, B);
        auto it = segments.find(id);
        if (it == segments.end()) throw InternalError("missing segment " + id.to_string());
        if (msg.parts.empty())
          msg.payload = it->second;
        else
          xor_into(msg.payload, it->second);
        msg.parts.push_back(id);
      }
      out.push_back(std::move(msg));
    }
  }
  return out;
}

Bytes decode_segment(const ShuffleScheme& scheme, const CodedMessage& message, const Bytes& payload,
                     const IVStore& store, int j, XorCounter* counter) {
  message.part_for(j);  // throws NotIntended
  Bytes acc = payload;
  for (const SegmentId& id : message.parts) {
    if (id.dest == j) continue;
    xor_into(acc, local_segment(scheme, store, j, id));
  }
  if (counter) counter->decode_bits.at(j - 1) += (message.parts.size() - 1) * 8 * payload.size();
  return acc;
}

std::vector<std::vector<CodedMessage>> encode_all(const ShuffleScheme& scheme, const IVStore& store,
                                                  XorCounter* counter) {
  const std::size_t P = scheme.partitions().size();
  std::vector<std::vector<CodedMessage>> out(P);
  std::vector<XorCounter> work(P, XorCounter(scheme.config().K()));
  parallel_for(P, [&](std::size_t i) {
    out[i] = encode_partition(scheme, store, static_cast<int>(i + 1), counter ? &work[i] : nullptr);
  });
  if (counter)
    for (const auto& w : work) counter->merge(w);
  return out;
}

ExchangeResult run_exchange(const ShuffleScheme& scheme, const IVStore& store,
                            const std::vector<std::vector<CodedMessage>>& messages,
                            const Delivery& delivery) {
  const ShuffleConfig& cfg = scheme.config();
  const PlacementMap& pm = scheme.placement();
  const int K = cfg.K();
  ExchangeResult res;
  res.work = XorCounter(K);
  for (const auto& batch : messages) res.messages += batch.size();

  // Each receiver works alone on what it heard.
  std::vector<std::map<SegmentId, Bytes>> decoded(K);
  std::vector<XorCounter> work(K, XorCounter(K));
  parallel_for(static_cast<std::size_t>(K), [&](std::size_t idx) {
    const int j = static_cast<int>(idx) + 1;
    for (const auto& batch : messages)
      for (const CodedMessage& msg : batch) {
        if (!msg.D.contains(j)) continue;
        Bytes heard = delivery(j, msg);
        decoded[idx].emplace(msg.part_for(j), decode_segment(scheme, msg, heard, store, j, &work[idx]));
      }
  });
  for (const auto& w : work) res.work.merge(w);

  const std::size_t iv_bytes = pm.params.B / 8;
  for (int j = 1; j <= K; ++j) {
    for (const NodeSet& U : enum_subsets(NodeSet::range(1, K).without(j), cfg.r())) {
      Bytes block;
      block.reserve(scheme.block_bits() / 8);
      for (const auto& [p, B] : scheme.admissible_pairs(j, U)) {
        auto it = decoded[j - 1].find(SegmentId{j, U, p, B});
        if (it == decoded[j - 1].end())
          throw InternalError("segment " + SegmentId{j, U, p, B}.to_string() + " never delivered");
        block.insert(block.end(), it->second.begin(), it->second.end());
      }
      const auto files = pm.files_of_subset(U);
      const auto& outputs = pm.outputs_of(j);
      std::size_t offset = 0;
      for (std::int64_t q : outputs)
        for (std::int64_t n : files) {
          const Bytes truth = iv_value(store.seed(), q, n, pm.params.B);
          ++res.ivs_checked;
          if (!std::equal(truth.begin(), truth.end(), block.begin() + offset) && !res.witness)
            res.witness = Witness{j, q, n};
          offset += iv_bytes;
        }
    }
  }
  res.ok = !res.witness.has_value();
  return res;
}

ExchangeResult run_ideal_exchange(const ShuffleScheme& scheme, const IVStore& store, bool fault) {
  XorCounter enc(scheme.config().K());
  auto messages = encode_all(scheme, store, &enc);
  Delivery delivery = [&](int, const CodedMessage& msg) {
    Bytes out = msg.payload;
    if (fault && msg.p == 1 && &msg == &messages.front().front() && !out.empty()) out[0] ^= 0x01;
    return out;
  };
  ExchangeResult res = run_exchange(scheme, store, messages, delivery);
  res.work.merge(enc);
  return res;
}

// --- load accounting -------------------------------------------------------

PartitionLoad per_partition_load(const SystemParams& params, int K_r, int t) {
  if (params.r == params.K) return PartitionLoad{0, 0, 0, 0};
  return per_partition_load(validate_config(params, K_r, t));
}

PartitionLoad per_partition_load(const ShuffleConfig& cfg) {
  const SystemParams& sp = cfg.params;
  const int K = cfg.K(), r = cfg.r();
  PartitionLoad out;
  const BigInt parts = binomial_big(K, cfg.K_r);
  out.R_p = Rational(1, cfg.K_r) * (1 - Rational(r, K)) / Rational(parts);
  const Rational seg_bits = sp.eta1() * sp.eta2() * Rational(BigInt(sp.B)) /
                            Rational(binomial_big(r, cfg.t) * binomial_big(K - r - 1, cfg.K_r - cfg.s));
  out.desired_bits = Rational(binomial_big(cfg.K_r - 1, cfg.s - 1) * binomial_big(cfg.K_t(), cfg.t)) * seg_bits;
  out.R_p_counted = out.desired_bits / Rational(BigInt(sp.N) * sp.Q * BigInt(sp.B));
  if (out.R_p != out.R_p_counted)
    throw InternalError("per-partition load mismatch: closed form " + to_string(out.R_p) +
                        " vs counted " + to_string(out.R_p_counted));
  out.total = Rational(parts) * out.R_p;
  return out;
}

// --- stragglers ------------------------------------------------------------

std::uint64_t StragglerPlan::total_slots() const {
  std::uint64_t total = 0;
  for (const auto& r : rounds) total += r.slots;
  return total;
}

StragglerPlan straggler_replan(const ShuffleConfig& cfg, const Partition& partition, const NodeSet& S) {
  if (!S.is_subset_of(partition.tx))
    throw ParameterError("stragglers " + S.to_string() + " are not all transmitters of partition " +
                         std::to_string(partition.index));
  if (S.size() >= cfg.t)
    throw UncombatableStraggler(std::to_string(S.size()) + " stragglers but only t - 1 = " +
                                std::to_string(cfg.t - 1) + " can be tolerated");
  StragglerPlan plan{partition.index, S, {}};
  const std::uint64_t per_group = binomial(cfg.K_r, cfg.s);
  for (int i = 0; i <= S.size(); ++i) plan.rounds.push_back(StragglerRound{i, {}, 0, 0});
  for (const NodeSet& B : enum_subsets(partition.tx, cfg.t)) {
    const int overlap = (B & S).size();
    plan.rounds[overlap].groups.emplace_back(B, B - S);
  }
  for (auto& round : plan.rounds) {
    round.messages = round.groups.size() * per_group;
    // Groups that still satisfy s + t' >= K_r + 1 neutralize in C(K_r-1, s-1)
    // slots each; the rest fall back to one message per slot.
    const int t_eff = cfg.t - round.overlap;
    if (cfg.s + t_eff >= cfg.K_r + 1)
      round.slots = round.groups.size() * binomial(cfg.K_r - 1, cfg.s - 1);
    else
      round.slots = round.messages;
  }
  return plan;
}

Rational coding_complexity(const ShuffleConfig& cfg) {
  const SystemParams& sp = cfg.params;
  const int K = cfg.K(), r = cfg.r(), K_r = cfg.K_r, t = cfg.t, s = cfg.s;
  const Rational seg_bits = sp.eta1() * sp.eta2() * Rational(BigInt(sp.B)) /
                            Rational(binomial_big(r, t) * binomial_big(K - r - 1, K_r - s));
  const BigInt per_partition = binomial_big(K - K_r - 1, t - 1) * binomial_big(K_r, s) +
                               binomial_big(K - K_r, t) * binomial_big(K_r - 1, s - 1);
  return Rational(binomial_big(K, K_r) * (s - 1) * per_partition) * seg_bits;
}

Rational coding_complexity_from_measured(const ShuffleConfig& cfg, std::uint64_t encode_bits,
                                         std::uint64_t decode_bits) {
  const int K = cfg.K();
  return Rational(BigInt(encode_bits)) * Rational(K, cfg.K_t()) +
         Rational(BigInt(decode_bits)) * Rational(K, cfg.K_r);
}

}  // namespace cpc
