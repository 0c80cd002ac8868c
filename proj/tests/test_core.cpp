#include <doctest.h>

#include <random>
#include <set>

#include "cpc/core.hpp"
#include "oracles.hpp"

using namespace cpc;

TEST_CASE("binomial matches Pascal's triangle") {
  for (int n = 0; n <= 62; ++n)
    for (int k = 0; k <= n; ++k) CHECK(binomial_big(n, k) == oracle::pascal(n, k));
  for (int n = 0; n <= 40; ++n)
    for (int k = 0; k <= n; ++k) CHECK(BigInt(binomial(n, k)) == oracle::pascal(n, k));
  CHECK(binomial(5, -1) == 0);
  CHECK(binomial(5, 6) == 0);
  CHECK(binomial(-3, 1) == 0);
  CHECK_THROWS_AS(binomial(200, 100), std::overflow_error);
  CHECK(binomial_big(200, 100) == oracle::pascal(200, 100));
}

TEST_CASE("rational helpers") {
  CHECK(cpc::floor(Rational(7, 2)) == 3);
  CHECK(cpc::floor(Rational(-7, 2)) == -4);
  CHECK(cpc::ceil(Rational(7, 2)) == 4);
  CHECK(cpc::ceil(Rational(-7, 2)) == -3);
  CHECK(cpc::ceil(Rational(4)) == 4);
  CHECK(to_string(Rational(2, 4)) == "1/2");
  CHECK(to_string(Rational(6, 3)) == "2");
  for (int n = 0; n < 2000; ++n) {
    const BigInt q = isqrt(n);
    CHECK(q * q <= n);
    CHECK((q + 1) * (q + 1) > n);
  }
}

TEST_CASE("NodeSet basics") {
  NodeSet a{3, 1, 2};
  CHECK(a.members() == std::vector<int>{1, 2, 3});
  CHECK(a.size() == 3);
  CHECK(a.front() == 1);
  CHECK(a.back() == 3);
  CHECK(a.to_string() == "{1,2,3}");
  CHECK(a.contains(2));
  CHECK_FALSE(a.contains(4));
  CHECK((a - NodeSet{2}) == NodeSet{1, 3});
  CHECK((a | NodeSet{5}) == NodeSet{1, 2, 3, 5});
  CHECK((a & NodeSet{2, 9}) == NodeSet{2});
  CHECK(a.with(64).back() == 64);
  CHECK(a.without(1) == NodeSet{2, 3});
  CHECK(NodeSet::range(2, 4) == NodeSet{2, 3, 4});
  CHECK(NodeSet::range(4, 2).empty());
  CHECK_THROWS_AS(NodeSet({1, 1}), ParameterError);
  CHECK_THROWS_AS(NodeSet({0}), ParameterError);
  CHECK_THROWS_AS(NodeSet({65}), ParameterError);
  CHECK_THROWS_AS(NodeSet{}.front(), ParameterError);
  CHECK_THROWS_AS(NodeSet({7}).validate(6), ParameterError);
  // lexicographic, not numeric mask order
  CHECK(NodeSet{1, 5} < NodeSet{2, 3});
  CHECK(NodeSet{1, 2} < NodeSet{1, 2, 3});
}

TEST_CASE("enum_subsets reproduces recursive enumeration order") {
  for (int n = 1; n <= 9; ++n)
    for (int k = 0; k <= n; ++k) {
      const auto mine = enum_subsets(NodeSet::range(1, n), k);
      const auto ref = oracle::subsets(n, k);
      REQUIRE(mine.size() == ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(mine[i].members() == ref[i]);
    }
  // a non-contiguous ground set keeps the same relative order
  const auto sub = enum_subsets(NodeSet{2, 5, 7}, 2);
  REQUIRE(sub.size() == 3);
  CHECK(sub[0] == NodeSet{2, 5});
  CHECK(sub[1] == NodeSet{2, 7});
  CHECK(sub[2] == NodeSet{5, 7});
}

TEST_CASE("partitions: count, complement and index round trip") {
  for (int K = 2; K <= 9; ++K)
    for (int Kt = 1; Kt <= K - 1; ++Kt) {
      const auto parts = enum_partitions(K, Kt);
      CHECK(parts.size() == binomial(K, Kt));
      std::set<std::uint64_t> seen;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const Partition& p = parts[i];
        CHECK(p.index == static_cast<int>(i) + 1);
        CHECK(p.tx.size() == Kt);
        CHECK((p.tx | p.rx) == NodeSet::range(1, K));
        CHECK(p.tx.disjoint(p.rx));
        CHECK(partition_index(K, p.tx) == p.index);
        seen.insert(p.tx.mask());
        if (i > 0) CHECK(parts[i - 1].tx < p.tx);
      }
      CHECK(seen.size() == parts.size());
    }
  CHECK_THROWS_AS(enum_partitions(4, 0), ParameterError);
  CHECK_THROWS_AS(enum_partitions(4, 4), ParameterError);
}

TEST_CASE("worked example partition labels") {
  // Transmitter sets of the first and last partitions for K = 6, K_t = 3.
  const auto parts = enum_partitions(6, 3);
  CHECK(parts.front().tx == NodeSet{1, 2, 3});
  CHECK(parts.front().rx == NodeSet{4, 5, 6});
  CHECK(parts.back().tx == NodeSet{4, 5, 6});
  CHECK(partition_index(6, NodeSet{1, 2, 6}) == 4);
}

TEST_CASE("system parameters") {
  const auto p = SystemParams::make(6, 20, 6, 3, 48);
  CHECK(p.eta1() == 1);
  CHECK(p.eta2() == 1);
  CHECK(p.symmetric());
  const auto q = SystemParams::make(6, 40, 12, 3, 48);
  CHECK(q.eta1_int() == 2);
  CHECK(q.eta2_int() == 2);
  const auto bad = SystemParams::make(6, 21, 6, 3, 48);
  CHECK_FALSE(bad.symmetric());
  CHECK_THROWS_AS(bad.require_symmetric(), InfeasibleInstance);
  CHECK_THROWS_AS(SystemParams::make(6, 20, 6, 7, 48), ParameterError);
  CHECK_THROWS_AS(SystemParams::make(6, 20, 6, 0, 48), ParameterError);
  CHECK_THROWS_AS(SystemParams::make(65, 20, 6, 3, 48), ParameterError);
  CHECK_THROWS_AS(SystemParams::make(6, 0, 6, 3, 48), ParameterError);
}

namespace {
Constraint violated(int K, int r, int Kr, int t) {
  try {
    validate_config(SystemParams::make(K, binomial(K, r), K, r, 8), Kr, t);
  } catch (const ConstraintViolation& e) {
    return e.constraint();
  }
  FAIL("expected a violation");
  return Constraint::kReceiverGroupSize;
}
}  // namespace

TEST_CASE("validate_config names the violated inequality") {
  const auto c = validate_config(SystemParams::make(6, 20, 6, 3, 48), 3, 2);
  CHECK(c.s == 2);
  CHECK(c.K_t() == 3);
  CHECK(violated(6, 3, 0, 1) == Constraint::kReceiverGroupSize);
  CHECK(violated(6, 3, 7, 1) == Constraint::kReceiverGroupSize);
  CHECK(violated(6, 3, 3, 0) == Constraint::kCooperationRange);
  CHECK(violated(6, 3, 3, 4) == Constraint::kCooperationRange);
  CHECK(violated(6, 3, 2, 1) == Constraint::kMulticastFitsReceivers);
  CHECK(violated(6, 3, 5, 2) == Constraint::kCooperationFitsTransmitters);
  CHECK(violated(6, 3, 6, 1) == Constraint::kCooperationFitsTransmitters);
  CHECK_FALSE(to_string(Constraint::kTransmittersBound).empty());
}

TEST_CASE("validate_config accepts exactly the oracle's valid set") {
  for (int K = 2; K <= 10; ++K)
    for (int r = 1; r <= K - 1; ++r)
      for (int Kr = 0; Kr <= K + 1; ++Kr)
        for (int t = 0; t <= r + 1; ++t) {
          const bool expect = oracle::valid(r, t, K, Kr);
          bool got = true;
          try {
            validate_config(SystemParams::make(K, binomial(K, r), K, r, 8), Kr, t);
          } catch (const ConstraintViolation&) {
            got = false;
          }
          CHECK(got == expect);
        }
}
