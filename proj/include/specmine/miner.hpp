#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "specmine/block.hpp"
#include "specmine/speculative_store.hpp"
#include "specmine/state.hpp"

namespace specmine {

/// Lock profiles whose per-key counters are not exactly 1..k.
class MalformedProfiles : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A happens-before graph that should have been acyclic was not.
class ScheduleCycle : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Throws MalformedProfiles unless, for every key, the counters across all
/// profiles are exactly {1, ..., k}.
void check_counter_contiguity(const std::vector<LockProfile>& profiles);

/// Edges connect the holders of consecutive counter values on each key.
/// Nodes are the profiles' tx ids.
HappensBeforeGraph build_happens_before(const std::vector<LockProfile>& profiles);

/// Kahn's algorithm; among ready nodes the smallest tx id goes first.
/// Throws ScheduleCycle on a cyclic graph.
std::vector<TxId> topo_sort(const HappensBeforeGraph& graph);

struct MinerOptions {
  unsigned workers = 3;
  std::uint32_t work_per_step = 0;
  std::string parent_digest = kGenesisDigest;
};

struct MiningStats {
  std::uint64_t retries = 0;  // deadlock-induced re-executions
};

/// Executes `txs` speculatively with up to `options.workers` concurrent
/// workers, mutating the store's state into the post-state, and assembles
/// the block. Transactions must carry dense ids 0..n-1 in list order.
Block mine_in_parallel(SpeculativeStore& store, const std::vector<TxRequest>& txs, const MinerOptions& options,
                       MiningStats* stats = nullptr);

/// Convenience overload with a private store over `state`.
Block mine_in_parallel(State& state, const std::vector<TxRequest>& txs, const MinerOptions& options);

struct SerialResult {
  std::string digest;
  std::vector<TxStatus> statuses;
};

/// One-at-a-time execution in list order through the serial shim.
SerialResult execute_serial(State& state, const std::vector<TxRequest>& txs, std::uint32_t work_per_step = 0);

/// `txs` permuted into the block's published serial order.
std::vector<TxRequest> in_serial_order(const Block& block);

}  // namespace specmine
