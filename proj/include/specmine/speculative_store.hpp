#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "specmine/execution.hpp"
#include "specmine/state.hpp"

namespace specmine {

using ActionId = std::uint64_t;

/// Restores `key` to `restore` when replayed.
struct InverseEntry {
  StorageKey key;
  Value restore;
};
using InverseLog = std::vector<InverseEntry>;

/// Locks a committed transaction held, each with the use-counter value the
/// lock reached at that commit.
struct LockProfile {
  TxId tx_id = 0;
  std::map<StorageKey, std::uint32_t> counters;

  bool operator==(const LockProfile&) const = default;
};

/// Edges u -> v mean transaction u waits for a lock held by v.
struct WaitsForGraph {
  std::map<TxId, std::vector<TxId>> edges;
};

/// Picks the deadlock victim: the largest tx id on the first cycle found
/// (searching from the smallest node). nullopt when the graph is acyclic.
std::optional<TxId> resolve_deadlock(const WaitsForGraph& graph);

enum class EventKind : std::uint8_t { kBegin, kAcquire, kOp, kCommit, kAbort, kRelease, kPassToParent };

std::string_view to_string(EventKind kind);

struct StoreEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kBegin;
  ActionId action = 0;
  ActionId parent = 0;  // 0 for top-level actions
  TxId tx = 0;
  std::optional<StorageKey> key;
};

/// Append-only debugging trace of store activity.
class EventLog {
 public:
  void record(EventKind kind, ActionId action, ActionId parent, TxId tx, const StorageKey* key = nullptr);
  std::vector<StoreEvent> events() const;
  /// One event per line: `<seq> <kind> action=<id> parent=<id> tx=<id> [key=<key>]`.
  std::string to_text() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::vector<StoreEvent> events_;
};

class SpeculativeStore;

/// One speculative atomic action: a transaction or a nested call inside one.
/// Acquires the abstract lock of every key it touches, logs inverses of its
/// mutations, and ends exactly once in commit, abort or revert. A live action
/// is aborted on destruction.
class Action final : public ExecutionContext {
 public:
  ~Action() override;
  Action(const Action&) = delete;
  Action& operator=(const Action&) = delete;

  Value read(const StorageKey& key) override;
  void write(const StorageKey& key, const Value& value) override;
  void erase(const StorageKey& key) override;
  void charge_step() override;
  bool call_nested(const std::function<void(ExecutionContext&)>& body) override;

  /// Top-level: bumps the use counter of every held lock, releases the locks
  /// and returns the profile. Nested: hands locks and log to the parent.
  std::optional<LockProfile> commit();
  /// Replays the log newest-first and releases the locks this action acquired.
  void abort();
  /// Undoes this action's effects but keeps its locks, then commits. Used for
  /// contract-level reverts, whose reads still order them in the schedule.
  std::optional<LockProfile> revert();

  ActionId id() const { return id_; }
  TxId tx_id() const { return tx_; }
  Action* parent() const { return parent_; }
  bool live() const { return state_ == Status::kLive; }
  const InverseLog& log() const { return log_; }
  const std::vector<StorageKey>& held_locks() const { return held_; }
  std::uint64_t steps_used() const { return steps_; }

 private:
  friend class SpeculativeStore;
  enum class Status { kLive, kCommitted, kAborted };

  Action(SpeculativeStore& store, ActionId id, TxId tx, Action* parent, GasMeter* gas);

  void charge();
  void require_finishable() const;
  void replay_log();
  bool inherits(ActionId holder) const;

  SpeculativeStore& store_;
  ActionId id_;
  TxId tx_;
  Action* parent_;
  GasMeter* gas_;
  Status state_ = Status::kLive;
  int live_children_ = 0;
  std::vector<StorageKey> held_;
  InverseLog log_;
  std::uint64_t steps_ = 0;
};

/// Transactional-boosting runtime over a State: one mutually exclusive
/// abstract lock per StorageKey with FIFO hand-off, waits-for deadlock
/// detection, and per-block use counters.
class SpeculativeStore {
 public:
  struct Options {
    bool record_events = false;
  };

  explicit SpeculativeStore(State& state) : SpeculativeStore(state, Options{}) {}
  SpeculativeStore(State& state, Options options) : state_(state), options_(options) {}
  SpeculativeStore(const SpeculativeStore&) = delete;
  SpeculativeStore& operator=(const SpeculativeStore&) = delete;

  /// Starts a top-level action when `parent` is null, otherwise a nested one
  /// sharing the parent's tx id and gas meter. `gas` may be null for an
  /// unmetered top-level action.
  Action begin_action(TxId tx, Action* parent = nullptr, GasMeter* gas = nullptr);

  /// Zeroes every use counter; call when a new block starts.
  void reset_block_counters();

  std::uint32_t use_counter(const StorageKey& key) const;

  /// Snapshot of the current waits-for relation between blocked transactions.
  WaitsForGraph waits_for() const;

  const EventLog& event_log() const { return events_; }
  EventLog& event_log() { return events_; }

  State& state() { return state_; }

 private:
  friend class Action;

  struct Waiter {
    ActionId action = 0;
    TxId tx = 0;
    const StorageKey* key = nullptr;
    std::condition_variable cv;
    bool granted = false;
    bool doomed = false;
  };

  struct LockEntry {
    ActionId holder = 0;
    TxId holder_tx = 0;
    std::deque<Waiter*> queue;
    std::uint32_t use_counter = 0;
  };

  void acquire(Action& action, const StorageKey& key);
  /// Requires mutex_. Hands the lock to the first waiter still in the running.
  void release_locked(LockEntry& entry, const StorageKey& key, const Action& owner);
  WaitsForGraph waits_for_locked() const;
  void record(EventKind kind, const Action& action, const StorageKey* key = nullptr);

  State& state_;
  Options options_;
  EventLog events_;

  mutable std::mutex mutex_;
  std::unordered_map<StorageKey, LockEntry, StorageKeyHash> locks_;
  std::unordered_map<TxId, Waiter*> waiting_;
  ActionId next_action_id_ = 1;
};

}  // namespace specmine
