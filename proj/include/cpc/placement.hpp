#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "cpc/core.hpp"

namespace cpc {

using Bytes = std::vector<std::uint8_t>;

/// (output index q, file index n), both 1-based.
using IVKey = std::pair<std::int64_t, std::int64_t>;

struct PlacementMap {
  SystemParams params;
  std::int64_t eta1 = 0;
  std::int64_t eta2 = 0;
  std::vector<NodeSet> file_to_nodes;                    // [n - 1]
  std::vector<std::vector<std::int64_t>> node_to_files;  // [k - 1], ascending
  std::vector<std::vector<std::int64_t>> reduce_assignment;  // [k - 1], ascending

  const NodeSet& storage_of(std::int64_t n) const { return file_to_nodes.at(n - 1); }
  const std::vector<std::int64_t>& files_at(int k) const { return node_to_files.at(k - 1); }
  const std::vector<std::int64_t>& outputs_of(int k) const { return reduce_assignment.at(k - 1); }

  /// The eta1 files stored exactly at the r-subset U, ascending.
  std::vector<std::int64_t> files_of_subset(const NodeSet& U) const;
  bool stores(int k, std::int64_t n) const { return storage_of(n).contains(k); }
};

/// Files go out in blocks of eta1 per r-subset, in lexicographic subset order.
PlacementMap build_placement(const SystemParams& params);

/// The intermediate value v_{q,n}: B/8 bytes from a keyed counter-mode hash.
Bytes iv_value(std::uint64_t seed, std::int64_t q, std::int64_t n, std::uint64_t B);

/// Intermediate values held by every node after the Map phase.
class IVStore {
 public:
  IVStore() = default;
  IVStore(int K, std::uint64_t seed) : seed_(seed), per_node_(K) {}

  bool has(int k, std::int64_t q, std::int64_t n) const;
  /// Throws std::out_of_range if node k did not compute v_{q,n}.
  const Bytes& at(int k, std::int64_t q, std::int64_t n) const;
  const std::map<IVKey, Bytes>& node(int k) const { return per_node_.at(k - 1); }
  std::map<IVKey, Bytes>& node(int k) { return per_node_.at(k - 1); }
  std::uint64_t seed() const { return seed_; }
  int K() const { return static_cast<int>(per_node_.size()); }

  /// Count of (node, q, n) entries, i.e. with multiplicity.
  std::size_t total_entries() const;

 private:
  std::uint64_t seed_ = 0;
  std::vector<std::map<IVKey, Bytes>> per_node_;
};

/// Throws ParameterError when B is not a multiple of 8.
IVStore map_phase(const PlacementMap& placement, std::uint64_t seed);

/// Pairs (q, n) node k must receive: q among its outputs, n not stored locally.
std::vector<IVKey> required_ivs(const PlacementMap& placement, int k);

}  // namespace cpc
