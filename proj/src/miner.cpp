#include "specmine/miner.hpp"

#include <atomic>
#include <functional>
#include <map>
#include <queue>
#include <thread>

#include "specmine/contracts.hpp"
#include "specmine/serial.hpp"

namespace specmine {
namespace {

struct TxOutcome {
  TxStatus status = TxStatus::kCommitted;
  LockProfile profile;
  std::uint64_t retries = 0;
};

TxOutcome run_speculative(SpeculativeStore& store, const TxRequest& tx, std::uint32_t work_per_step) {
  TxOutcome out;
  for (;;) {
    GasMeter gas(tx.msg.gas_limit, work_per_step);
    Action root = store.begin_action(tx.tx_id, nullptr, &gas);
    try {
      execute_transaction(root, tx);
      out.status = TxStatus::kCommitted;
      out.profile = *root.commit();
      return out;
    } catch (const AbortRetry&) {
      root.abort();
      ++out.retries;
    } catch (const OutOfGas&) {
      out.status = TxStatus::kOutOfGas;
      out.profile = *root.revert();
      return out;
    } catch (const std::exception&) {
      out.status = TxStatus::kReverted;
      out.profile = *root.revert();
      return out;
    }
  }
}

}  // namespace

void check_counter_contiguity(const std::vector<LockProfile>& profiles) {
  std::map<StorageKey, std::vector<std::uint32_t>> per_key;
  for (const auto& p : profiles) {
    for (const auto& [key, counter] : p.counters) per_key[key].push_back(counter);
  }
  for (auto& [key, counters] : per_key) {
    std::sort(counters.begin(), counters.end());
    for (std::size_t i = 0; i < counters.size(); ++i) {
      if (counters[i] != i + 1) {
        throw MalformedProfiles("counters for " + key.debug_string() + " are not contiguous from 1");
      }
    }
  }
}

HappensBeforeGraph build_happens_before(const std::vector<LockProfile>& profiles) {
  check_counter_contiguity(profiles);
  HappensBeforeGraph graph;
  std::map<StorageKey, std::map<std::uint32_t, TxId>> holders;
  for (const auto& p : profiles) {
    graph.nodes.push_back(p.tx_id);
    for (const auto& [key, counter] : p.counters) holders[key][counter] = p.tx_id;
  }
  std::sort(graph.nodes.begin(), graph.nodes.end());
  for (const auto& [key, by_counter] : holders) {
    for (auto it = by_counter.begin(); std::next(it) != by_counter.end(); ++it) {
      const TxId from = it->second;
      const TxId to = std::next(it)->second;
      if (from != to) graph.edges.emplace(from, to);
    }
  }
  return graph;
}

std::vector<TxId> topo_sort(const HappensBeforeGraph& graph) {
  std::map<TxId, std::size_t> indegree;
  std::map<TxId, std::vector<TxId>> succ;
  for (TxId n : graph.nodes) indegree[n] = 0;
  for (const auto& [u, v] : graph.edges) {
    succ[u].push_back(v);
    ++indegree[v];
  }
  std::priority_queue<TxId, std::vector<TxId>, std::greater<>> ready;
  for (const auto& [n, d] : indegree) {
    if (d == 0) ready.push(n);
  }
  std::vector<TxId> order;
  order.reserve(indegree.size());
  while (!ready.empty()) {
    const TxId n = ready.top();
    ready.pop();
    order.push_back(n);
    for (TxId m : succ[n]) {
      if (--indegree[m] == 0) ready.push(m);
    }
  }
  if (order.size() != indegree.size()) throw ScheduleCycle("happens-before graph has a cycle");
  return order;
}

Block mine_in_parallel(SpeculativeStore& store, const std::vector<TxRequest>& txs, const MinerOptions& options,
                       MiningStats* stats) {
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (txs[i].tx_id != i) throw std::invalid_argument("transaction ids must be dense and in list order");
  }
  store.reset_block_counters();

  Block block;
  block.parent_digest = options.parent_digest;
  block.txs = txs;
  block.pre_state_digest = store.state().digest();

  std::vector<TxOutcome> outcomes(txs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < txs.size(); i = next.fetch_add(1)) {
      outcomes[i] = run_speculative(store, txs[i], options.work_per_step);
    }
  };
  {
    const unsigned extra = options.workers > 1 ? options.workers - 1 : 0;
    std::vector<std::jthread> pool;
    pool.reserve(extra);
    for (unsigned w = 0; w < extra; ++w) pool.emplace_back(worker);
    worker();
  }

  block.statuses.reserve(txs.size());
  block.profiles.reserve(txs.size());
  std::uint64_t retries = 0;
  for (auto& o : outcomes) {
    block.statuses.push_back(o.status);
    block.profiles.push_back(std::move(o.profile));
    retries += o.retries;
  }
  if (stats != nullptr) stats->retries = retries;

  block.schedule.hb = build_happens_before(block.profiles);
  block.schedule.serial_order = topo_sort(block.schedule.hb);
  block.post_state_digest = store.state().digest();
  return block;
}

Block mine_in_parallel(State& state, const std::vector<TxRequest>& txs, const MinerOptions& options) {
  SpeculativeStore store(state);
  return mine_in_parallel(store, txs, options);
}

SerialResult execute_serial(State& state, const std::vector<TxRequest>& txs, std::uint32_t work_per_step) {
  SerialResult result;
  result.statuses.reserve(txs.size());
  for (const auto& tx : txs) result.statuses.push_back(run_serial_transaction(state, tx, work_per_step));
  result.digest = state.digest();
  return result;
}

std::vector<TxRequest> in_serial_order(const Block& block) {
  std::vector<TxRequest> ordered;
  ordered.reserve(block.schedule.serial_order.size());
  for (TxId id : block.schedule.serial_order) ordered.push_back(block.txs.at(id));
  return ordered;
}

}  // namespace specmine
