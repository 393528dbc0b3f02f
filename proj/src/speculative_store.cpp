#include "specmine/speculative_store.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace specmine {

// ---------------------------------------------------------------- deadlock

std::optional<TxId> resolve_deadlock(const WaitsForGraph& graph) {
  enum class Color { kWhite, kGrey, kBlack };
  std::map<TxId, Color> color;
  std::vector<TxId> stack;

  // Iterative DFS keeps deep wait chains off the call stack.
  struct Frame {
    TxId node;
    std::size_t next_edge;
  };

  for (const auto& [root, unused] : graph.edges) {
    if (color[root] != Color::kWhite) continue;
    std::vector<Frame> frames{{root, 0}};
    color[root] = Color::kGrey;
    stack.assign(1, root);
    while (!frames.empty()) {
      Frame& top = frames.back();
      auto it = graph.edges.find(top.node);
      const std::vector<TxId>* succ = it == graph.edges.end() ? nullptr : &it->second;
      if (succ == nullptr || top.next_edge >= succ->size()) {
        color[top.node] = Color::kBlack;
        frames.pop_back();
        stack.pop_back();
        continue;
      }
      const TxId next = (*succ)[top.next_edge++];
      const Color c = color[next];
      if (c == Color::kGrey) {
        auto begin = std::find(stack.begin(), stack.end(), next);
        return *std::max_element(begin, stack.end());
      }
      if (c == Color::kWhite) {
        color[next] = Color::kGrey;
        frames.push_back({next, 0});
        stack.push_back(next);
      }
    }
  }
  return std::nullopt;
}

// --------------------------------------------------------------- event log

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kBegin:
      return "begin";
    case EventKind::kAcquire:
      return "acquire";
    case EventKind::kOp:
      return "op";
    case EventKind::kCommit:
      return "commit";
    case EventKind::kAbort:
      return "abort";
    case EventKind::kRelease:
      return "release";
    case EventKind::kPassToParent:
      return "pass-to-parent";
  }
  return "?";
}

void EventLog::record(EventKind kind, ActionId action, ActionId parent, TxId tx, const StorageKey* key) {
  std::lock_guard lock(mutex_);
  StoreEvent ev;
  ev.seq = events_.size();
  ev.kind = kind;
  ev.action = action;
  ev.parent = parent;
  ev.tx = tx;
  if (key != nullptr) ev.key = *key;
  events_.push_back(std::move(ev));
}

std::vector<StoreEvent> EventLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::string EventLog::to_text() const {
  std::ostringstream out;
  for (const auto& ev : events()) {
    out << ev.seq << ' ' << to_string(ev.kind) << " action=" << ev.action << " parent=" << ev.parent << " tx=" << ev.tx;
    if (ev.key) out << " key=" << ev.key->debug_string();
    out << '\n';
  }
  return out.str();
}

void EventLog::clear() {
  std::lock_guard lock(mutex_);
  events_.clear();
}

// ------------------------------------------------------------------ Action

Action::Action(SpeculativeStore& store, ActionId id, TxId tx, Action* parent, GasMeter* gas)
    : store_(store), id_(id), tx_(tx), parent_(parent), gas_(gas) {}

Action::~Action() {
  if (live()) {
    try {
      live_children_ = 0;
      abort();
    } catch (...) {
    }
  }
}

void Action::charge() {
  if (gas_ != nullptr) gas_->charge();
  ++steps_;
}

void Action::charge_step() { charge(); }

bool Action::inherits(ActionId holder) const {
  for (const Action* a = this; a != nullptr; a = a->parent_) {
    if (a->id_ == holder) return true;
  }
  return false;
}

Value Action::read(const StorageKey& key) {
  if (!live()) throw UsageError("read on a finished action");
  charge();
  store_.acquire(*this, key);
  store_.record(EventKind::kOp, *this, &key);
  return store_.state_.get(key);
}

void Action::write(const StorageKey& key, const Value& value) {
  if (!live()) throw UsageError("write on a finished action");
  charge();
  store_.acquire(*this, key);
  store_.record(EventKind::kOp, *this, &key);
  log_.push_back({key, store_.state_.get(key)});
  store_.state_.put(key, value);
}

void Action::erase(const StorageKey& key) { write(key, Value::absent()); }

bool Action::call_nested(const std::function<void(ExecutionContext&)>& body) {
  Action child = store_.begin_action(tx_, this);
  try {
    body(child);
    child.commit();
    return true;
  } catch (const Revert&) {
    child.revert();
    return false;
  } catch (const AbortRetry&) {
    child.abort();
    throw;
  } catch (...) {
    // Any other failure is deterministic; the child's reads still count.
    child.revert();
    throw;
  }
}

void Action::require_finishable() const {
  if (!live()) throw UsageError("action already finished");
  if (live_children_ != 0) throw UsageError("action has live nested actions");
}

void Action::replay_log() {
  for (auto it = log_.rbegin(); it != log_.rend(); ++it) store_.state_.put(it->key, it->restore);
  log_.clear();
}

std::optional<LockProfile> Action::commit() {
  require_finishable();
  store_.record(EventKind::kCommit, *this);
  std::optional<LockProfile> profile;
  {
    std::lock_guard lock(store_.mutex_);
    if (parent_ == nullptr) {
      profile.emplace();
      profile->tx_id = tx_;
      for (const auto& key : held_) {
        auto& entry = store_.locks_.at(key);
        profile->counters.emplace(key, ++entry.use_counter);
        store_.release_locked(entry, key, *this);
      }
    } else {
      for (const auto& key : held_) {
        store_.locks_.at(key).holder = parent_->id_;
        store_.record(EventKind::kPassToParent, *this, &key);
        parent_->held_.push_back(key);
      }
    }
  }
  if (parent_ != nullptr) {
    parent_->log_.insert(parent_->log_.end(), log_.begin(), log_.end());
    --parent_->live_children_;
  }
  held_.clear();
  log_.clear();
  state_ = Status::kCommitted;
  return profile;
}

void Action::abort() {
  require_finishable();
  store_.record(EventKind::kAbort, *this);
  replay_log();
  {
    std::lock_guard lock(store_.mutex_);
    for (const auto& key : held_) store_.release_locked(store_.locks_.at(key), key, *this);
  }
  held_.clear();
  if (parent_ != nullptr) --parent_->live_children_;
  state_ = Status::kAborted;
}

std::optional<LockProfile> Action::revert() {
  require_finishable();
  replay_log();
  return commit();
}

// -------------------------------------------------------- SpeculativeStore

Action SpeculativeStore::begin_action(TxId tx, Action* parent, GasMeter* gas) {
  ActionId id = 0;
  {
    std::lock_guard lock(mutex_);
    id = next_action_id_++;
  }
  if (parent != nullptr) {
    if (!parent->live()) throw UsageError("parent action is not live");
    if (parent->tx_id() != tx) throw UsageError("nested action must share its parent's tx id");
    ++parent->live_children_;
    if (gas == nullptr) gas = parent->gas_;
  }
  if (options_.record_events) events_.record(EventKind::kBegin, id, parent ? parent->id() : 0, tx);
  return Action(*this, id, tx, parent, gas);
}

void SpeculativeStore::record(EventKind kind, const Action& action, const StorageKey* key) {
  if (!options_.record_events) return;
  events_.record(kind, action.id(), action.parent() ? action.parent()->id() : 0, action.tx_id(), key);
}

void SpeculativeStore::acquire(Action& action, const StorageKey& key) {
  std::unique_lock lock(mutex_);
  auto [it, inserted] = locks_.try_emplace(key);
  LockEntry& entry = it->second;
  const StorageKey& stable_key = it->first;

  if (entry.holder == 0) {
    entry.holder = action.id();
    entry.holder_tx = action.tx_id();
    action.held_.push_back(stable_key);
    record(EventKind::kAcquire, action, &stable_key);
    return;
  }
  if (action.inherits(entry.holder)) return;

  Waiter self;
  self.action = action.id();
  self.tx = action.tx_id();
  self.key = &stable_key;
  entry.queue.push_back(&self);
  waiting_[self.tx] = &self;

  if (const auto victim = resolve_deadlock(waits_for_locked())) {
    Waiter* doomed = waiting_.at(*victim);
    doomed->doomed = true;
    doomed->cv.notify_one();
  }

  self.cv.wait(lock, [&] { return self.granted || self.doomed; });
  waiting_.erase(self.tx);
  if (self.granted) {
    action.held_.push_back(stable_key);
    record(EventKind::kAcquire, action, &stable_key);
  } else {
    std::erase(entry.queue, &self);
  }
  if (self.doomed) throw AbortRetry();
}

void SpeculativeStore::release_locked(LockEntry& entry, const StorageKey& key, const Action& owner) {
  record(EventKind::kRelease, owner, &key);
  entry.holder = 0;
  entry.holder_tx = 0;
  while (!entry.queue.empty()) {
    Waiter* next = entry.queue.front();
    entry.queue.pop_front();
    if (next->doomed) continue;
    entry.holder = next->action;
    entry.holder_tx = next->tx;
    next->granted = true;
    next->cv.notify_one();
    break;
  }
}

WaitsForGraph SpeculativeStore::waits_for_locked() const {
  WaitsForGraph graph;
  for (const auto& [tx, waiter] : waiting_) {
    if (waiter->doomed || waiter->granted) continue;
    const LockEntry& entry = locks_.at(*waiter->key);
    if (entry.holder != 0) graph.edges[tx].push_back(entry.holder_tx);
  }
  return graph;
}

WaitsForGraph SpeculativeStore::waits_for() const {
  std::lock_guard lock(mutex_);
  return waits_for_locked();
}

void SpeculativeStore::reset_block_counters() {
  std::lock_guard lock(mutex_);
  for (auto it = locks_.begin(); it != locks_.end();) {
    if (it->second.holder == 0 && it->second.queue.empty()) {
      it = locks_.erase(it);
    } else {
      it->second.use_counter = 0;
      ++it;
    }
  }
}

std::uint32_t SpeculativeStore::use_counter(const StorageKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = locks_.find(key);
  return it == locks_.end() ? 0 : it->second.use_counter;
}

}  // namespace specmine
