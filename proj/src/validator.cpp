#include "specmine/validator.hpp"

#include <condition_variable>
#include <mutex>
#include <queue>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "specmine/contracts.hpp"
#include "specmine/miner.hpp"

namespace specmine {
namespace {

/// Non-speculative handle for one replayed transaction. Writes go to an
/// overlay stack (one layer per nested call) that reaches shared state only
/// when the transaction commits; touched keys are recorded task-locally.
class ReplayContext final : public ExecutionContext {
 public:
  ReplayContext(State& shared, GasMeter& gas, ReplayTrace& trace) : shared_(shared), gas_(gas), trace_(trace) {
    layers_.emplace_back();
  }

  Value read(const StorageKey& key) override {
    gas_.charge();
    touch(key);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
      if (auto found = it->find(key); found != it->end()) return found->second;
    }
    return shared_.get(key);
  }

  void write(const StorageKey& key, const Value& value) override {
    gas_.charge();
    touch(key);
    layers_.back().insert_or_assign(key, value);
  }

  void erase(const StorageKey& key) override { write(key, Value::absent()); }

  void charge_step() override { gas_.charge(); }

  bool call_nested(const std::function<void(ExecutionContext&)>& body) override {
    layers_.emplace_back();
    try {
      body(*this);
    } catch (const Revert&) {
      layers_.pop_back();
      return false;
    } catch (...) {
      layers_.pop_back();
      throw;
    }
    auto top = std::move(layers_.back());
    layers_.pop_back();
    for (auto& [key, value] : top) layers_.back().insert_or_assign(key, std::move(value));
    return true;
  }

  void flush() {
    for (const auto& [key, value] : layers_.front()) shared_.put(key, value);
  }

 private:
  void touch(const StorageKey& key) {
    if (seen_.insert(key).second) trace_.keys.push_back(key);
  }

  State& shared_;
  GasMeter& gas_;
  ReplayTrace& trace_;
  std::vector<std::unordered_map<StorageKey, Value, StorageKeyHash>> layers_;
  std::unordered_set<StorageKey, StorageKeyHash> seen_;
};

void replay_transaction(State& state, const TxRequest& tx, std::uint32_t work_per_step, ReplayTrace& trace) {
  GasMeter gas(tx.msg.gas_limit, work_per_step);
  ReplayContext ctx(state, gas, trace);
  try {
    execute_transaction(ctx, tx);
    trace.status = TxStatus::kCommitted;
    ctx.flush();
  } catch (const OutOfGas&) {
    trace.status = TxStatus::kOutOfGas;
  } catch (const std::exception&) {
    trace.status = TxStatus::kReverted;
  }
}

// Holders of each key according to the published profiles, by counter.
std::map<StorageKey, std::map<std::uint32_t, TxId>> profile_holders(const Block& block,
                                                                    std::optional<Rejection>& problem) {
  std::map<StorageKey, std::map<std::uint32_t, TxId>> holders;
  for (const auto& p : block.profiles) {
    for (const auto& [key, counter] : p.counters) {
      if (!holders[key].emplace(counter, p.tx_id).second && !problem) {
        problem = Rejection{RejectReason::kProfileMismatch, "duplicate counter on " + key.debug_string()};
      }
    }
  }
  return holders;
}

std::optional<Rejection> check_profile_races(const Block& block, const Reachability& reach) {
  std::optional<Rejection> problem;
  const auto holders = profile_holders(block, problem);
  for (const auto& [key, by_counter] : holders) {
    std::vector<TxId> txs;
    for (const auto& [c, tx] : by_counter) txs.push_back(tx);
    for (std::size_t i = 0; i < txs.size(); ++i) {
      for (std::size_t j = i + 1; j < txs.size(); ++j) {
        if (!reach.ordered(txs[i], txs[j])) {
          return Rejection{RejectReason::kRaceDetected, "txs " + std::to_string(txs[i]) + " and " +
                                                            std::to_string(txs[j]) + " both hold " +
                                                            key.debug_string() + " without ordering"};
        }
      }
    }
  }
  return problem;
}

}  // namespace

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kDigestMismatch:
      return "DigestMismatch";
    case RejectReason::kStatusMismatch:
      return "StatusMismatch";
    case RejectReason::kProfileMismatch:
      return "ProfileMismatch";
    case RejectReason::kRaceDetected:
      return "RaceDetected";
    case RejectReason::kMalformedSchedule:
      return "MalformedSchedule";
  }
  return "?";
}

// ------------------------------------------------------------ task graph

TaskGraph construct_validator(const Schedule& schedule) {
  const std::set<TxId> nodes(schedule.hb.nodes.begin(), schedule.hb.nodes.end());
  if (nodes.size() != schedule.hb.nodes.size()) throw MalformedSchedule("duplicate graph nodes");
  if (schedule.serial_order.size() != nodes.size()) throw MalformedSchedule("serial order length differs from node count");

  std::map<TxId, std::size_t> position;
  for (std::size_t i = 0; i < schedule.serial_order.size(); ++i) {
    const TxId t = schedule.serial_order[i];
    if (!nodes.contains(t)) throw MalformedSchedule("serial order names unknown tx " + std::to_string(t));
    if (!position.emplace(t, i).second) throw MalformedSchedule("serial order repeats tx " + std::to_string(t));
  }

  TaskGraph graph;
  graph.order = schedule.serial_order;
  for (TxId t : schedule.serial_order) graph.joins[t];
  // Reversing H: the tasks a node joins are its H predecessors.
  for (const auto& [u, v] : schedule.hb.edges) {
    if (!nodes.contains(u) || !nodes.contains(v)) throw MalformedSchedule("edge leaves the node set");
    if (position.at(u) >= position.at(v)) {
      throw MalformedSchedule("serial order is not topological for edge (" + std::to_string(u) + ", " +
                              std::to_string(v) + ")");
    }
    graph.joins[v].push_back(u);
  }
  for (auto& [t, preds] : graph.joins) std::sort(preds.begin(), preds.end());
  return graph;
}

void run_fork_join(const TaskGraph& graph, unsigned workers, const std::function<void(TxId)>& task) {
  const std::size_t n = graph.order.size();
  if (n == 0) return;

  std::map<TxId, std::size_t> pending;
  std::map<TxId, std::vector<TxId>> dependents;
  for (const auto& [t, preds] : graph.joins) {
    pending[t] = preds.size();
    for (TxId p : preds) dependents[p].push_back(t);
  }

  std::mutex mutex;
  std::condition_variable cv;
  std::priority_queue<TxId, std::vector<TxId>, std::greater<>> ready;
  std::size_t finished = 0;
  for (const auto& [t, count] : pending) {
    if (count == 0) ready.push(t);
  }

  auto worker = [&] {
    std::unique_lock lock(mutex);
    for (;;) {
      cv.wait(lock, [&] { return !ready.empty() || finished == n; });
      if (ready.empty()) return;
      const TxId t = ready.top();
      ready.pop();
      lock.unlock();
      task(t);
      lock.lock();
      ++finished;
      bool woke = false;
      for (TxId d : dependents[t]) {
        if (--pending[d] == 0) {
          ready.push(d);
          woke = true;
        }
      }
      if (finished == n || woke) cv.notify_all();
    }
  };

  const unsigned extra = workers > 1 ? workers - 1 : 0;
  std::vector<std::jthread> pool;
  pool.reserve(extra);
  for (unsigned w = 0; w < extra; ++w) pool.emplace_back(worker);
  worker();
}

// ---------------------------------------------------------- reachability

Reachability::Reachability(const HappensBeforeGraph& graph) {
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) index_.emplace(graph.nodes[i], i);
  const std::size_t n = graph.nodes.size();
  words_ = (n + 63) / 64;
  bits_.assign(n * words_, 0);

  std::vector<TxId> order;
  try {
    order = topo_sort(graph);
  } catch (const ScheduleCycle& e) {
    throw MalformedSchedule(e.what());
  }
  std::map<TxId, std::vector<TxId>> succ;
  for (const auto& [u, v] : graph.edges) {
    if (!index_.contains(u) || !index_.contains(v)) throw MalformedSchedule("edge leaves the node set");
    succ[u].push_back(v);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t u = index_.at(*it);
    std::uint64_t* row = &bits_[u * words_];
    for (TxId v_id : succ[*it]) {
      const std::size_t v = index_.at(v_id);
      row[v / 64] |= std::uint64_t{1} << (v % 64);
      const std::uint64_t* vrow = &bits_[v * words_];
      for (std::size_t w = 0; w < words_; ++w) row[w] |= vrow[w];
    }
  }
}

bool Reachability::reaches(TxId u, TxId v) const {
  auto iu = index_.find(u);
  auto iv = index_.find(v);
  if (iu == index_.end() || iv == index_.end()) return false;
  const std::size_t col = iv->second;
  return (bits_[iu->second * words_ + col / 64] >> (col % 64)) & 1U;
}

// ----------------------------------------------------------------- checks

std::optional<Rejection> check_traces(const std::vector<ReplayTrace>& traces, const Block& block,
                                      const Reachability& reach) {
  if (traces.size() != block.txs.size()) return Rejection{RejectReason::kProfileMismatch, "trace count differs"};

  std::map<StorageKey, std::vector<TxId>> touched;
  for (TxId t = 0; t < traces.size(); ++t) {
    for (const auto& key : traces[t].keys) touched[key].push_back(t);
  }

  // Race freedom: every pair touching a key must be ordered by H.
  for (const auto& [key, txs] : touched) {
    for (std::size_t i = 0; i < txs.size(); ++i) {
      for (std::size_t j = i + 1; j < txs.size(); ++j) {
        if (!reach.ordered(txs[i], txs[j])) {
          return Rejection{RejectReason::kRaceDetected, "txs " + std::to_string(txs[i]) + " and " +
                                                            std::to_string(txs[j]) + " touch " + key.debug_string() +
                                                            " concurrently"};
        }
      }
    }
  }

  std::optional<Rejection> problem;
  const auto holders = profile_holders(block, problem);
  if (problem) return problem;

  // Membership: replay and profiles agree on who touched each key.
  for (const auto& [key, txs] : touched) {
    auto it = holders.find(key);
    std::set<TxId> published;
    if (it != holders.end()) {
      for (const auto& [c, t] : it->second) published.insert(t);
    }
    if (published != std::set<TxId>(txs.begin(), txs.end())) {
      return Rejection{RejectReason::kProfileMismatch, "holders of " + key.debug_string() + " differ from replay"};
    }
  }
  for (const auto& [key, by_counter] : holders) {
    if (!touched.contains(key)) {
      return Rejection{RejectReason::kProfileMismatch, key.debug_string() + " listed but never touched in replay"};
    }
  }

  // Order: counters run 1..k and ascend along H.
  for (const auto& [key, by_counter] : holders) {
    std::uint32_t expected = 1;
    std::optional<TxId> previous;
    for (const auto& [counter, t] : by_counter) {
      if (counter != expected++) {
        return Rejection{RejectReason::kProfileMismatch, "counters on " + key.debug_string() + " are not 1..k"};
      }
      if (previous && !reach.reaches(*previous, t)) {
        return Rejection{RejectReason::kProfileMismatch, "counter order on " + key.debug_string() +
                                                             " contradicts the happens-before graph"};
      }
      previous = t;
    }
  }

  for (TxId t = 0; t < traces.size(); ++t) {
    if (traces[t].status != block.statuses.at(t)) {
      return Rejection{RejectReason::kStatusMismatch, "tx " + std::to_string(t) + " replayed as " +
                                                          std::string(to_string(traces[t].status)) + ", block says " +
                                                          std::string(to_string(block.statuses.at(t)))};
    }
  }
  return std::nullopt;
}

// ----------------------------------------------------------------- replay

VerificationResult replay(const Block& block, State& state, const ValidatorOptions& options) {
  VerificationResult result;
  auto reject = [&](RejectReason reason, std::string detail) {
    result.rejection = Rejection{reason, std::move(detail)};
    return result;
  };

  if (block.statuses.size() != block.txs.size() || block.profiles.size() != block.txs.size()) {
    return reject(RejectReason::kMalformedSchedule, "statuses or profiles do not cover the txs");
  }
  for (TxId t = 0; t < block.txs.size(); ++t) {
    if (block.txs[t].tx_id != t || block.profiles[t].tx_id != t) {
      return reject(RejectReason::kMalformedSchedule, "tx ids are not dense");
    }
    if (t >= block.schedule.hb.nodes.size() || block.schedule.hb.nodes[t] != t) {
      return reject(RejectReason::kMalformedSchedule, "graph nodes differ from tx ids");
    }
  }
  if (block.schedule.hb.nodes.size() != block.txs.size()) {
    return reject(RejectReason::kMalformedSchedule, "graph nodes differ from tx ids");
  }
  if (state.digest() != block.pre_state_digest) {
    return reject(RejectReason::kDigestMismatch, "pre-state digest differs from the block");
  }

  TaskGraph graph;
  std::optional<Reachability> reach;
  try {
    graph = construct_validator(block.schedule);
    reach.emplace(block.schedule.hb);
  } catch (const MalformedSchedule& e) {
    return reject(RejectReason::kMalformedSchedule, e.what());
  }

  // Refuse to replay a schedule that leaves published conflicts unordered.
  if (auto problem = check_profile_races(block, *reach)) {
    result.rejection = std::move(problem);
    return result;
  }

  std::vector<ReplayTrace> traces(block.txs.size());
  run_fork_join(graph, options.workers, [&](TxId t) {
    replay_transaction(state, block.txs[t], options.work_per_step, traces[t]);
  });

  result.replay_digest = state.digest();
  for (const auto& tr : traces) result.replay_statuses.push_back(tr.status);

  if (auto problem = check_traces(traces, block, *reach)) {
    result.rejection = std::move(problem);
    return result;
  }
  if (result.replay_digest != block.post_state_digest) {
    return reject(RejectReason::kDigestMismatch, "replayed post-state digest " + result.replay_digest +
                                                     " differs from the block's " + block.post_state_digest);
  }
  return result;
}

}  // namespace specmine
