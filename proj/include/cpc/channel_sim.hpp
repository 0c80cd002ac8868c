#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "cpc/core.hpp"
#include "cpc/shuffle_codec.hpp"

namespace cpc {

using cplx = std::complex<double>;

/// A Gamma x Gamma receive matrix crossed the condition guard. Probability
/// zero under continuous fading; redraw the channel and retry.
class ResampleAdvisory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested regime (s + t = K_r) is handled analytically only.
class RegimeNotSimulated : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kConditionGuard = 1e8;
inline constexpr double kResidualTolerance = 1e-9;

/// Gains h_{j,m}(d) for receivers j and transmitters m in [1, K], slots d in [0, slots).
class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(int K, int slots, std::uint64_t seed, std::vector<cplx> gains)
      : K_(K), slots_(slots), seed_(seed), gains_(std::move(gains)) {}

  int K() const { return K_; }
  int slots() const { return slots_; }
  std::uint64_t seed() const { return seed_; }
  const cplx& h(int j, int m, int d) const {
    return gains_[(static_cast<std::size_t>(d) * K_ + (j - 1)) * K_ + (m - 1)];
  }
  const std::vector<cplx>& raw() const { return gains_; }

 private:
  int K_ = 0;
  int slots_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<cplx> gains_;
};

/// i.i.d. CN(0, 1) entries from a seeded mt19937_64.
ChannelRealization draw_channel(int K, int slots, std::uint64_t seed);

/// Cofactors of the bottom row of [h_{psi, m}(d) for psi in null_rx ; b],
/// one weight per member of active_tx in ascending order.
Eigen::VectorXcd neutralizing_precoder(const ChannelRealization& channel, int d, const NodeSet& active_tx,
                                       const NodeSet& null_rx);

struct SimOptions {
  double tolerance = 1e-6;          // symbol error under which a payload counts as recovered
  std::optional<double> snr_db;     // noise off when empty
  std::uint64_t noise_seed = 0;
};

struct DeliveryReport {
  std::map<int, std::uint64_t> symbols_per_receiver;  // decoded (sub)symbols by node
  std::uint64_t slots = 0;
  Rational measured_dof;            // decoded symbols per receiver per slot
  double max_condition = 0.0;
  double max_residual = 0.0;        // |sum h w| / (||h|| ||w||) at neutralized receivers
  double min_signal = 0.0;          // same ratio at intended receivers, smallest seen
  double max_symbol_error = 0.0;
  double symbol_mse = 0.0;
  std::uint64_t symbols = 0;
  std::uint64_t failed_symbols = 0;
  int resamples = 0;
  /// Payload as reassembled by each destination, keyed (p, receiver, D mask, B mask).
  std::map<std::tuple<int, int, std::uint64_t, std::uint64_t>, Bytes> delivered;

  void merge(const DeliveryReport& other);
};

/// Unit-power symbol standing in for a payload.
cplx payload_symbol(const Bytes& payload);

/// s + t >= K_r + 1. Each cooperation group B gets C(K_r-1, s-1) slots in turn.
DeliveryReport simulate_partition_case_a(const Partition& partition, const ShuffleConfig& config,
                                         const ChannelRealization& channel,
                                         const std::vector<CodedMessage>& messages,
                                         const SimOptions& options = {});

/// s + t <= K_r - 1. Messages split into C(K_r-s, t-1) pieces, one per receiver
/// set of size r, each set served by the s + t >= K_r + 1 construction.
DeliveryReport simulate_case_c_timedivision(const Partition& partition, const ShuffleConfig& config,
                                            const ChannelRealization& channel,
                                            const std::vector<CodedMessage>& messages,
                                            const SimOptions& options = {});

/// Channel slots one partition needs under the simulated regimes.
std::uint64_t partition_slots(const ShuffleConfig& config);

enum class Regime { kCaseA, kCaseB, kCaseC };
Regime regime_of(const ShuffleConfig& config);
std::string to_string(Regime r);

struct VerifyResult {
  bool ok = false;
  std::optional<Witness> witness;
  DeliveryReport report;
  Rational min_partition_dof;
  Rational max_partition_dof;
  std::size_t ivs_checked = 0;
  std::size_t messages = 0;
};

/// Placement, Map, segmentation, encoding, per-partition channel delivery,
/// XOR decoding and reassembly of every required intermediate value.
/// With fault set, one bit of the first message is flipped before transmission.
VerifyResult end_to_end_verify(const SystemParams& params, const ShuffleConfig& config, std::uint64_t seed,
                               const SimOptions& options = {}, bool fault = false);

}  // namespace cpc
