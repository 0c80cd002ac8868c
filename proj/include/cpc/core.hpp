#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace cpc {

// Expression templates off: results of mixed expressions are plain values,
// so std::min/std::max and auto work without surprises.
using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

/// Largest node count supported by the scheme constructors.
inline constexpr int kMaxNodes = 64;

// ---------------------------------------------------------------------------
// Errors

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// eta1 or eta2 is not an integer, so the symmetric placement does not exist.
class InfeasibleInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Constraint {
  kReceiverGroupSize,         // 1 <= K_r <= K
  kCooperationRange,          // 1 <= t <= r
  kMulticastFitsReceivers,    // s <= K_r
  kCooperationFitsTransmitters,  // t <= K - K_r
  kTransmittersBound,         // K - K_r <= K - s
};

std::string to_string(Constraint c);

class ConstraintViolation : public ParameterError {
 public:
  ConstraintViolation(Constraint which, const std::string& detail);
  Constraint constraint() const noexcept { return which_; }

 private:
  Constraint which_;
};

/// A construction invariant was broken; always a bug, never bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Exact combinatorics

/// C(n, k) in 64 bits; 0 when k < 0, n < 0 or k > n. Throws std::overflow_error.
std::uint64_t binomial(std::int64_t n, std::int64_t k);

/// C(n, k) without overflow, same conventions as binomial().
BigInt binomial_big(std::int64_t n, std::int64_t k);

/// Floor of a rational, exact.
BigInt floor(const Rational& x);

/// Ceiling of a rational, exact.
BigInt ceil(const Rational& x);

/// Floor of sqrt(n) for n >= 0.
BigInt isqrt(const BigInt& n);

double to_double(const Rational& x);

/// "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& x);

// ---------------------------------------------------------------------------
// NodeSet

/// Set of 1-based node indices in [1, 64], kept as a bit mask.
///
/// Iteration and members() yield ascending order; comparison is
/// lexicographic over the ascending member sequences, so sorting a
/// collection of equal-size subsets reproduces combination order.
class NodeSet {
 public:
  class const_iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = int;
    using difference_type = std::ptrdiff_t;
    using pointer = const int*;
    using reference = int;

    const_iterator() = default;
    explicit const_iterator(std::uint64_t rest) : rest_(rest) {}
    int operator*() const { return std::countr_zero(rest_) + 1; }
    const_iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    const_iterator operator++(int) {
      auto old = *this;
      ++*this;
      return old;
    }
    bool operator==(const const_iterator&) const = default;

   private:
    std::uint64_t rest_ = 0;
  };

  NodeSet() = default;
  /// Members may be given in any order; duplicates or out-of-range values throw.
  NodeSet(std::initializer_list<int> members);
  explicit NodeSet(const std::vector<int>& members);

  static NodeSet from_mask(std::uint64_t mask) { return NodeSet(mask, 0); }
  /// {first, ..., last}; empty when last < first.
  static NodeSet range(int first, int last);

  std::uint64_t mask() const noexcept { return mask_; }
  int size() const noexcept { return std::popcount(mask_); }
  bool empty() const noexcept { return mask_ == 0; }
  bool contains(int node) const noexcept;
  bool is_subset_of(const NodeSet& other) const noexcept {
    return (mask_ & ~other.mask_) == 0;
  }
  bool disjoint(const NodeSet& other) const noexcept {
    return (mask_ & other.mask_) == 0;
  }
  int front() const;
  int back() const;
  std::vector<int> members() const;

  /// Throws ParameterError unless every member lies in [1, K].
  void validate(int K) const;

  NodeSet with(int node) const;
  NodeSet without(int node) const;

  const_iterator begin() const { return const_iterator(mask_); }
  const_iterator end() const { return const_iterator(0); }

  friend NodeSet operator|(NodeSet a, NodeSet b) { return from_mask(a.mask_ | b.mask_); }
  friend NodeSet operator&(NodeSet a, NodeSet b) { return from_mask(a.mask_ & b.mask_); }
  /// Set difference.
  friend NodeSet operator-(NodeSet a, NodeSet b) { return from_mask(a.mask_ & ~b.mask_); }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;
  friend std::strong_ordering operator<=>(const NodeSet& a, const NodeSet& b);

  std::string to_string() const;

 private:
  NodeSet(std::uint64_t mask, int) : mask_(mask) {}
  std::uint64_t mask_ = 0;
};

// ---------------------------------------------------------------------------
// Problem instance

struct SystemParams {
  int K = 0;
  std::int64_t N = 0;
  std::int64_t Q = 0;
  int r = 0;
  std::uint64_t B = 0;  // bits per intermediate value

  /// Validates 1 <= r <= K <= 64 and N, Q, B >= 1.
  static SystemParams make(int K, std::int64_t N, std::int64_t Q, int r, std::uint64_t B);

  Rational eta1() const;
  Rational eta2() const;
  bool symmetric() const;
  /// Throws InfeasibleInstance unless eta1 and eta2 are integers.
  void require_symmetric() const;
  std::int64_t eta1_int() const;
  std::int64_t eta2_int() const;
};

struct Partition {
  int index = 0;  // 1-based, lexicographic in tx
  NodeSet tx;
  NodeSet rx;
};

struct ShuffleConfig {
  SystemParams params;
  int K_r = 0;
  int t = 0;
  int s = 0;

  int K() const { return params.K; }
  int r() const { return params.r; }
  int K_t() const { return params.K - K_r; }
};

/// All k-subsets of ground in lexicographic order.
std::vector<NodeSet> enum_subsets(const NodeSet& ground, int k);

/// The C(K, K_t) transmitter/receiver splits, p = 1.. in lexicographic tx order.
std::vector<Partition> enum_partitions(int K, int K_t);

/// Rank of tx among the lexicographically ordered |tx|-subsets of [K], 1-based.
int partition_index(int K, const NodeSet& tx);

/// The constraint checks alone, for any K; returns s = r + 1 - t.
int check_constraints(int K, int r, int K_r, int t);

/// Builds the config with s = r + 1 - t or throws ConstraintViolation.
ShuffleConfig validate_config(const SystemParams& params, int K_r, int t);

}  // namespace cpc
