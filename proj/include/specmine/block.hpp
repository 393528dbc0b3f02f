#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "specmine/execution.hpp"
#include "specmine/speculative_store.hpp"

namespace specmine {

inline constexpr std::uint32_t kBlockVersion = 1;
inline const std::string kGenesisDigest(64, '0');

/// DAG over a block's transactions; (u, v) means u happens before v.
struct HappensBeforeGraph {
  std::vector<TxId> nodes;  // ascending
  std::set<std::pair<TxId, TxId>> edges;

  bool operator==(const HappensBeforeGraph&) const = default;
};

/// Published serial order plus the happens-before graph it linearizes.
struct Schedule {
  std::vector<TxId> serial_order;
  HappensBeforeGraph hb;

  bool operator==(const Schedule&) const = default;
};

struct Block {
  std::uint32_t version = kBlockVersion;
  std::string parent_digest = kGenesisDigest;
  std::vector<TxRequest> txs;
  std::vector<TxStatus> statuses;
  Schedule schedule;
  std::vector<LockProfile> profiles;  // indexed by tx id
  std::string pre_state_digest;
  std::string post_state_digest;

  bool operator==(const Block&) const = default;
};

}  // namespace specmine
