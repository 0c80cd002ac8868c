#include "cpc/placement.hpp"

#include <algorithm>

namespace cpc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

PlacementMap build_placement(const SystemParams& params) {
  params.require_symmetric();
  PlacementMap pm;
  pm.params = params;
  pm.eta1 = params.eta1_int();
  pm.eta2 = params.eta2_int();
  pm.file_to_nodes.reserve(params.N);
  pm.node_to_files.assign(params.K, {});
  pm.reduce_assignment.assign(params.K, {});

  std::int64_t n = 1;
  for (const NodeSet& U : enum_subsets(NodeSet::range(1, params.K), params.r)) {
    for (std::int64_t i = 0; i < pm.eta1; ++i, ++n) {
      pm.file_to_nodes.push_back(U);
      for (int k : U) pm.node_to_files[k - 1].push_back(n);
    }
  }
  for (int k = 1; k <= params.K; ++k)
    for (std::int64_t q = (k - 1) * pm.eta2 + 1; q <= k * pm.eta2; ++q)
      pm.reduce_assignment[k - 1].push_back(q);
  return pm;
}

std::vector<std::int64_t> PlacementMap::files_of_subset(const NodeSet& U) const {
  if (U.size() != params.r)
    throw ParameterError("storage set " + U.to_string() + " does not have r members");
  U.validate(params.K);
  const std::int64_t first = static_cast<std::int64_t>(partition_index(params.K, U) - 1) * eta1 + 1;
  std::vector<std::int64_t> out(eta1);
  for (std::int64_t i = 0; i < eta1; ++i) out[i] = first + i;
  return out;
}

Bytes iv_value(std::uint64_t seed, std::int64_t q, std::int64_t n, std::uint64_t B) {
  if (B % 8 != 0) throw ParameterError("B = " + std::to_string(B) + " is not a multiple of 8");
  const std::uint64_t key =
      splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(q) * 0x100000001b3ULL ^
                                   splitmix64(static_cast<std::uint64_t>(n))));
  Bytes out(B / 8);
  for (std::size_t i = 0; i < out.size(); i += 8) {
    std::uint64_t block = splitmix64(key + i / 8);
    for (std::size_t b = 0; b < 8 && i + b < out.size(); ++b)
      out[i + b] = static_cast<std::uint8_t>(block >> (8 * b));
  }
  return out;
}

bool IVStore::has(int k, std::int64_t q, std::int64_t n) const {
  if (k < 1 || k > K()) return false;
  return per_node_[k - 1].count({q, n}) != 0;
}

const Bytes& IVStore::at(int k, std::int64_t q, std::int64_t n) const {
  return per_node_.at(k - 1).at({q, n});
}

std::size_t IVStore::total_entries() const {
  std::size_t total = 0;
  for (const auto& m : per_node_) total += m.size();
  return total;
}

IVStore map_phase(const PlacementMap& placement, std::uint64_t seed) {
  const SystemParams& p = placement.params;
  if (p.B % 8 != 0) throw ParameterError("B = " + std::to_string(p.B) + " is not a multiple of 8");
  IVStore store(p.K, seed);
  for (int k = 1; k <= p.K; ++k) {
    auto& local = store.node(k);
    for (std::int64_t n : placement.files_at(k))
      for (std::int64_t q = 1; q <= p.Q; ++q) local.emplace(IVKey{q, n}, iv_value(seed, q, n, p.B));
  }
  return store;
}

std::vector<IVKey> required_ivs(const PlacementMap& placement, int k) {
  if (k < 1 || k > placement.params.K) throw ParameterError("node index out of range");
  std::vector<IVKey> out;
  for (std::int64_t q : placement.outputs_of(k))
    for (std::int64_t n = 1; n <= placement.params.N; ++n)
      if (!placement.stores(k, n)) out.emplace_back(q, n);
  return out;
}

}  // namespace cpc
