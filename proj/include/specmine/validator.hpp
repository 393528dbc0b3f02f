#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specmine/block.hpp"
#include "specmine/state.hpp"

namespace specmine {

enum class RejectReason : std::uint8_t {
  kDigestMismatch,
  kStatusMismatch,
  kProfileMismatch,
  kRaceDetected,
  kMalformedSchedule,
};

std::string_view to_string(RejectReason reason);

struct Rejection {
  RejectReason reason;
  std::string detail;
};

struct VerificationResult {
  std::optional<Rejection> rejection;  // nullopt means Accept
  std::string replay_digest;           // empty if replay never ran
  std::vector<TxStatus> replay_statuses;

  bool accepted() const { return !rejection.has_value(); }
};

class MalformedSchedule : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fork-join program for one block: every task joins the tasks of its
/// happens-before predecessors, then executes its transaction.
struct TaskGraph {
  std::vector<TxId> order;                   // task creation order (the serial order)
  std::map<TxId, std::vector<TxId>> joins;   // tx -> predecessors to join, ascending

  bool operator==(const TaskGraph&) const = default;
};

/// Throws MalformedSchedule if the serial order is not a permutation of the
/// graph's nodes, an edge leaves the node set, or the order is not
/// topological for the graph.
TaskGraph construct_validator(const Schedule& schedule);

/// Runs each task after all tasks it joins, with up to `workers` threads
/// (the caller's thread included). Ready tasks start smallest tx id first.
void run_fork_join(const TaskGraph& graph, unsigned workers, const std::function<void(TxId)>& task);

/// Transitive closure of a happens-before graph as one bitset row per node.
class Reachability {
 public:
  /// Throws MalformedSchedule on a cyclic graph.
  explicit Reachability(const HappensBeforeGraph& graph);

  /// True if there is a non-empty path u -> v.
  bool reaches(TxId u, TxId v) const;
  /// True if u and v are distinct and one reaches the other.
  bool ordered(TxId u, TxId v) const { return reaches(u, v) || reaches(v, u); }

 private:
  std::map<TxId, std::size_t> index_;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Keys a replayed transaction touched, in first-touch order, plus its status.
struct ReplayTrace {
  std::vector<StorageKey> keys;
  TxStatus status = TxStatus::kCommitted;
};

/// Post-replay comparison against the published block. Checks, in order:
/// race freedom of the traces under the happens-before graph (RaceDetected),
/// per-key membership and counter order against the profiles
/// (ProfileMismatch), and per-tx statuses (StatusMismatch).
std::optional<Rejection> check_traces(const std::vector<ReplayTrace>& traces, const Block& block,
                                      const Reachability& reach);

struct ValidatorOptions {
  unsigned workers = 3;
  std::uint32_t work_per_step = 0;
};

/// Replays `block` from `state` (which must hold the block's pre-state and is
/// advanced to the replayed post-state) as a fork-join program without locks
/// or undo logs, then verifies traces, statuses and the post-state digest.
VerificationResult replay(const Block& block, State& state, const ValidatorOptions& options);

}  // namespace specmine
