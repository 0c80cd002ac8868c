#pragma once

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpc/core.hpp"
#include "cpc/placement.hpp"

namespace cpc {

/// decode_segment was asked to decode at a node outside the message's D.
class NotIntended : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A node lacks an intermediate value the construction promised it would have.
class SideInformationMissing : public InternalError {
 public:
  using InternalError::InternalError;
};

class UncombatableStraggler : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Addresses the piece of v_{d_j, U} handed to cooperation group B in partition p.
struct SegmentId {
  int dest = 0;
  NodeSet U;
  int p = 0;
  NodeSet B;

  auto operator<=>(const SegmentId&) const = default;
  std::string to_string() const;
};

struct CodedMessage {
  int p = 0;
  NodeSet D;  // receivers, |D| = s
  NodeSet B;  // cooperating transmitters, |B| = t
  Bytes payload;
  std::vector<SegmentId> parts;  // one per member of D, ascending dest

  /// The constituent this receiver wants; throws NotIntended if j is not in D.
  const SegmentId& part_for(int j) const;
};

/// Bit-XOR work per node, split by role.
struct XorCounter {
  std::vector<std::uint64_t> encode_bits;  // [k - 1]
  std::vector<std::uint64_t> decode_bits;  // [k - 1]

  explicit XorCounter(int K = 0) : encode_bits(K, 0), decode_bits(K, 0) {}
  void merge(const XorCounter& other);
  std::uint64_t total(int k) const { return encode_bits.at(k - 1) + decode_bits.at(k - 1); }
};

/// Immutable description of one CPC shuffle: config, partitions and the
/// segment layout. Everything is derived from the config and the placement.
class ShuffleScheme {
 public:
  ShuffleScheme(const ShuffleConfig& config, const PlacementMap& placement);

  const ShuffleConfig& config() const { return config_; }
  const PlacementMap& placement() const { return placement_; }
  const std::vector<Partition>& partitions() const { return partitions_; }
  const Partition& partition(int p) const { return partitions_.at(p - 1); }

  /// C(r, t) * C(K - r - 1, K_r - s).
  std::uint64_t segments_per_block() const { return segments_per_block_; }
  /// Bits in v_{d_j, U}: eta1 * eta2 * B.
  std::uint64_t block_bits() const { return block_bits_; }
  Rational segment_bits() const { return Rational(block_bits_, segments_per_block_); }
  /// Whole bytes per segment. Throws InfeasibleInstance if the split is not byte aligned.
  std::size_t segment_bytes() const;

  /// (p, B) pairs that receive a piece of v_{d_j, U}, sorted by B then p.
  std::vector<std::pair<int, NodeSet>> admissible_pairs(int j, const NodeSet& U) const;
  std::size_t segment_position(const SegmentId& id) const;
  bool is_admissible(const SegmentId& id) const;

  /// The constituent of V^{(p)}_{D,B} that node j wants.
  SegmentId segment_for(int j, const NodeSet& D, int p, const NodeSet& B) const;

  /// Messages per partition: C(K_t, t) * C(K_r, s).
  std::uint64_t messages_per_partition() const;
  /// Messages one receiver wants per partition: C(K_t, t) * C(K_r - 1, s - 1).
  std::uint64_t desired_per_receiver() const;

 private:
  ShuffleConfig config_;
  PlacementMap placement_;
  std::vector<Partition> partitions_;
  std::uint64_t segments_per_block_ = 0;
  std::uint64_t block_bits_ = 0;
};

/// Bytes of the segment as computed at holder from its own intermediate values.
/// Throws SideInformationMissing when holder is not in id.U.
Bytes local_segment(const ShuffleScheme& scheme, const IVStore& store, int holder, const SegmentId& id);

/// Every segment of every block, read at the first member of its storage set.
std::map<SegmentId, Bytes> segment_ivs(const ShuffleScheme& scheme, const IVStore& store);

/// Messages of partition p, in (B, D) lexicographic order. Every member of B
/// builds the payload from its own store; disagreement is an InternalError.
std::vector<CodedMessage> encode_partition(const ShuffleScheme& scheme, const IVStore& store, int p,
                                           XorCounter* counter = nullptr);

/// Same messages built from a precomputed segment table; a missing entry is an InternalError.
std::vector<CodedMessage> encode_partition(const ShuffleScheme& scheme,
                                           const std::map<SegmentId, Bytes>& segments, int p);

/// Recovers node j's constituent by XORing payload with its local side information.
Bytes decode_segment(const ShuffleScheme& scheme, const CodedMessage& message, const Bytes& payload,
                     const IVStore& store, int j, XorCounter* counter = nullptr);

std::vector<std::vector<CodedMessage>> encode_all(const ShuffleScheme& scheme, const IVStore& store,
                                                  XorCounter* counter = nullptr);

/// The payload receiver j ends up with for a message.
using Delivery = std::function<Bytes(int receiver, const CodedMessage&)>;

struct Witness {
  int node = 0;
  std::int64_t q = 0;
  std::int64_t n = 0;
};

struct ExchangeResult {
  bool ok = false;
  std::optional<Witness> witness;
  std::size_t messages = 0;
  std::size_t ivs_checked = 0;
  XorCounter work;
};

/// Decodes every delivered message, reassembles every required v_{q,n} at
/// every node and compares it with a fresh Map computation.
ExchangeResult run_exchange(const ShuffleScheme& scheme, const IVStore& store,
                            const std::vector<std::vector<CodedMessage>>& messages,
                            const Delivery& delivery);

/// Error-free delivery; with fault set, one bit of the first message is flipped in transit.
ExchangeResult run_ideal_exchange(const ShuffleScheme& scheme, const IVStore& store, bool fault = false);

struct PartitionLoad {
  Rational R_p;             // closed form
  Rational R_p_counted;     // desired bits per receiver over N Q B
  Rational desired_bits;    // per receiver per partition
  Rational total;           // C(K, K_r) * R_p
};

/// r = K returns all zeros.
PartitionLoad per_partition_load(const SystemParams& params, int K_r, int t);
PartitionLoad per_partition_load(const ShuffleConfig& config);

struct StragglerRound {
  int overlap = 0;  // |B ∩ S|
  std::vector<std::pair<NodeSet, NodeSet>> groups;  // (original B, B \ S)
  std::uint64_t messages = 0;
  std::uint64_t slots = 0;
};

struct StragglerPlan {
  int p = 0;
  NodeSet stragglers;
  std::vector<StragglerRound> rounds;
  std::uint64_t total_slots() const;
};

/// Throws UncombatableStraggler when |S| >= t and ParameterError when S is not inside T_p.
StragglerPlan straggler_replan(const ShuffleConfig& config, const Partition& partition, const NodeSet& S);

/// Per-node XOR count as the closed form states it, in bits.
Rational coding_complexity(const ShuffleConfig& config);

/// The same closed form rebuilt from measured work: enc * K / K_t + dec * K / K_r.
Rational coding_complexity_from_measured(const ShuffleConfig& config, std::uint64_t encode_bits,
                                         std::uint64_t decode_bits);

}  // namespace cpc
