#include "cpc/core.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace cpc {

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::kReceiverGroupSize:
      return "1 <= K_r <= K";
    case Constraint::kCooperationRange:
      return "1 <= t <= r";
    case Constraint::kMulticastFitsReceivers:
      return "s <= K_r";
    case Constraint::kCooperationFitsTransmitters:
      return "t <= K - K_r";
    case Constraint::kTransmittersBound:
      return "K - K_r <= K - s";
  }
  return "unknown";
}

ConstraintViolation::ConstraintViolation(Constraint which, const std::string& detail)
    : ParameterError("constraint violated: " + to_string(which) + " (" + detail + ")"),
      which_(which) {}

std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t acc = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i stays exact because acc = C(n - k + i - 1, i - 1).
    unsigned __int128 wide = static_cast<unsigned __int128>(acc) * static_cast<std::uint64_t>(n - k + i);
    wide /= static_cast<std::uint64_t>(i);
    if (wide > std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("binomial(" + std::to_string(n) + ", " + std::to_string(k) +
                                ") overflows 64 bits");
    acc = static_cast<std::uint64_t>(wide);
  }
  return acc;
}

BigInt binomial_big(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt acc = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    acc *= (n - k + i);
    acc /= i;
  }
  return acc;
}

BigInt floor(const Rational& x) {
  BigInt num = boost::multiprecision::numerator(x);
  BigInt den = boost::multiprecision::denominator(x);
  BigInt q = num / den;
  if (num < 0 && q * den != num) q -= 1;
  return q;
}

BigInt ceil(const Rational& x) { return -floor(-x); }

BigInt isqrt(const BigInt& n) {
  if (n < 0) throw ParameterError("isqrt of a negative number");
  if (n < 2) return n;
  BigInt x = boost::multiprecision::sqrt(n);
  while (x * x > n) --x;
  while ((x + 1) * (x + 1) <= n) ++x;
  return x;
}

double to_double(const Rational& x) { return x.convert_to<double>(); }

std::string to_string(const Rational& x) {
  if (boost::multiprecision::denominator(x) == 1) return boost::multiprecision::numerator(x).str();
  return boost::multiprecision::numerator(x).str() + "/" + boost::multiprecision::denominator(x).str();
}

// --- NodeSet ---------------------------------------------------------------

namespace {
std::uint64_t bit_of(int node) {
  if (node < 1 || node > kMaxNodes)
    throw ParameterError("node index " + std::to_string(node) + " outside [1, 64]");
  return std::uint64_t{1} << (node - 1);
}
}  // namespace

NodeSet::NodeSet(std::initializer_list<int> members) : NodeSet(std::vector<int>(members)) {}

NodeSet::NodeSet(const std::vector<int>& members) {
  for (int m : members) {
    std::uint64_t b = bit_of(m);
    if (mask_ & b) throw ParameterError("duplicate node " + std::to_string(m) + " in NodeSet");
    mask_ |= b;
  }
}

NodeSet NodeSet::range(int first, int last) {
  NodeSet out;
  for (int i = first; i <= last; ++i) out.mask_ |= bit_of(i);
  return out;
}

bool NodeSet::contains(int node) const noexcept {
  if (node < 1 || node > kMaxNodes) return false;
  return (mask_ >> (node - 1)) & 1U;
}

int NodeSet::front() const {
  if (empty()) throw ParameterError("front() of empty NodeSet");
  return std::countr_zero(mask_) + 1;
}

int NodeSet::back() const {
  if (empty()) throw ParameterError("back() of empty NodeSet");
  return 64 - std::countl_zero(mask_);
}

std::vector<int> NodeSet::members() const { return {begin(), end()}; }

void NodeSet::validate(int K) const {
  if (!empty() && back() > K)
    throw ParameterError("node " + std::to_string(back()) + " exceeds K = " + std::to_string(K));
}

NodeSet NodeSet::with(int node) const { return from_mask(mask_ | bit_of(node)); }
NodeSet NodeSet::without(int node) const { return from_mask(mask_ & ~bit_of(node)); }

std::strong_ordering operator<=>(const NodeSet& a, const NodeSet& b) {
  if (a.mask_ == b.mask_) return std::strong_ordering::equal;
  // Compare ascending member sequences. At the lowest differing element x,
  // the set holding x has x where the other has something larger (or ends).
  std::uint64_t diff = a.mask_ ^ b.mask_;
  std::uint64_t low = diff & (~diff + 1);
  std::uint64_t above = ~((low << 1) - 1);
  if (a.mask_ & low) {
    // b either continues past low (then a < b) or is a proper prefix of a.
    return (b.mask_ & above) ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return (a.mask_ & above) ? std::strong_ordering::greater : std::strong_ordering::less;
}

std::string NodeSet::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int m : *this) {
    if (!first) os << ',';
    os << m;
    first = false;
  }
  os << '}';
  return os.str();
}

// --- SystemParams ----------------------------------------------------------

SystemParams SystemParams::make(int K, std::int64_t N, std::int64_t Q, int r, std::uint64_t B) {
  if (K < 1 || K > kMaxNodes) throw ParameterError("K must lie in [1, 64]");
  if (r < 1 || r > K) throw ParameterError("r must lie in [1, K]");
  if (N < 1) throw ParameterError("N must be positive");
  if (Q < 1) throw ParameterError("Q must be positive");
  if (B < 1) throw ParameterError("B must be positive");
  return SystemParams{K, N, Q, r, B};
}

Rational SystemParams::eta1() const { return Rational(N, BigInt(binomial(K, r))); }
Rational SystemParams::eta2() const { return Rational(Q, K); }

bool SystemParams::symmetric() const {
  return N % static_cast<std::int64_t>(binomial(K, r)) == 0 && Q % K == 0;
}

void SystemParams::require_symmetric() const {
  if (N % static_cast<std::int64_t>(binomial(K, r)) != 0)
    throw InfeasibleInstance("eta1 = N / C(K, r) = " + cpc::to_string(eta1()) +
                             " is not an integer");
  if (Q % K != 0)
    throw InfeasibleInstance("eta2 = Q / K = " + cpc::to_string(eta2()) + " is not an integer");
}

std::int64_t SystemParams::eta1_int() const {
  require_symmetric();
  return N / static_cast<std::int64_t>(binomial(K, r));
}

std::int64_t SystemParams::eta2_int() const {
  require_symmetric();
  return Q / K;
}

// --- enumeration -----------------------------------------------------------

std::vector<NodeSet> enum_subsets(const NodeSet& ground, int k) {
  const std::vector<int> g = ground.members();
  const int n = static_cast<int>(g.size());
  if (k < 0 || k > n)
    throw ParameterError("subset size " + std::to_string(k) + " outside [0, " +
                         std::to_string(n) + "]");
  std::vector<NodeSet> out;
  out.reserve(binomial(n, k));
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::uint64_t m = 0;
    for (int i : idx) m |= std::uint64_t{1} << (g[i] - 1);
    out.push_back(NodeSet::from_mask(m));
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

std::vector<Partition> enum_partitions(int K, int K_t) {
  if (K < 2 || K > kMaxNodes) throw ParameterError("partitions need 2 <= K <= 64");
  if (K_t < 1 || K_t > K - 1) throw ParameterError("K_t must lie in [1, K-1]");
  const NodeSet all = NodeSet::range(1, K);
  std::vector<Partition> out;
  int p = 1;
  for (const NodeSet& tx : enum_subsets(all, K_t)) out.push_back({p++, tx, all - tx});
  return out;
}

int partition_index(int K, const NodeSet& tx) {
  // Combinadic rank: count subsets that precede tx lexicographically.
  const int k = tx.size();
  std::uint64_t rank = 0;
  int prev = 0;
  int pos = 0;
  for (int m : tx) {
    for (int v = prev + 1; v < m; ++v) rank += binomial(K - v, k - pos - 1);
    prev = m;
    ++pos;
  }
  return static_cast<int>(rank) + 1;
}

int check_constraints(int K, int r, int K_r, int t) {
  auto detail = [&](const std::string& extra) {
    return "K=" + std::to_string(K) + ", r=" + std::to_string(r) + ", K_r=" + std::to_string(K_r) +
           ", t=" + std::to_string(t) + extra;
  };
  if (K_r < 1 || K_r > K) throw ConstraintViolation(Constraint::kReceiverGroupSize, detail(""));
  if (t < 1 || t > r) throw ConstraintViolation(Constraint::kCooperationRange, detail(""));
  const int s = r + 1 - t;
  const std::string with_s = ", s=" + std::to_string(s);
  if (s > K_r) throw ConstraintViolation(Constraint::kMulticastFitsReceivers, detail(with_s));
  if (t > K - K_r)
    throw ConstraintViolation(Constraint::kCooperationFitsTransmitters, detail(with_s));
  if (K - K_r > K - s) throw ConstraintViolation(Constraint::kTransmittersBound, detail(with_s));
  return s;
}

ShuffleConfig validate_config(const SystemParams& params, int K_r, int t) {
  const int s = check_constraints(params.K, params.r, K_r, t);
  return ShuffleConfig{params, K_r, t, s};
}

}  // namespace cpc
