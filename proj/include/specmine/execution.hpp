#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "specmine/value.hpp"

namespace specmine {

using TxId = std::uint32_t;

inline constexpr std::uint64_t kDefaultGasLimit = 10'000;

enum class TxStatus : std::uint8_t { kCommitted, kReverted, kOutOfGas };

std::string_view to_string(TxStatus status);
/// Throws std::invalid_argument for unknown names.
TxStatus parse_tx_status(std::string_view name);

struct MsgContext {
  Address sender;
  std::int64_t value = 0;
  std::uint64_t gas_limit = kDefaultGasLimit;

  bool operator==(const MsgContext&) const = default;
};

struct TxRequest {
  TxId tx_id = 0;
  std::string contract;
  std::string function;
  std::vector<Value> args;
  MsgContext msg;

  bool operator==(const TxRequest&) const = default;
};

/// Contract-level `throw`: the transaction's effects are discarded.
class Revert : public std::runtime_error {
 public:
  explicit Revert(const std::string& why) : std::runtime_error(why) {}
};

/// The transaction exceeded its step budget.
class OutOfGas : public std::runtime_error {
 public:
  OutOfGas() : std::runtime_error("out of gas") {}
};

/// Speculative execution lost a deadlock; the whole transaction must be
/// rolled back and re-run from scratch.
class AbortRetry : public std::runtime_error {
 public:
  AbortRetry() : std::runtime_error("aborted for retry") {}
};

/// Misuse of an API (e.g. committing an action with live children).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Per-transaction step budget shared by a transaction and its nested calls.
/// `work_per_step` adds a fixed amount of CPU work to every step so that
/// execution cost resembles an interpreted VM rather than native code.
class GasMeter {
 public:
  explicit GasMeter(std::uint64_t limit, std::uint32_t work_per_step = 0)
      : limit_(limit), work_per_step_(work_per_step) {}

  /// Throws OutOfGas once the budget is exhausted.
  void charge() {
    if (used_ >= limit_) throw OutOfGas();
    ++used_;
    if (work_per_step_ != 0) burn(work_per_step_);
  }

  std::uint64_t used() const { return used_; }
  std::uint64_t limit() const { return limit_; }

  static void burn(std::uint32_t iterations);

 private:
  std::uint64_t limit_;
  std::uint64_t used_ = 0;
  std::uint32_t work_per_step_;
};

/// Handle through which contract code reaches storage. Every storage access
/// costs one gas step. Implementations: speculative actions (miner), the
/// serial shim, and the fork-join replay context (validator).
class ExecutionContext {
 public:
  virtual ~ExecutionContext() = default;

  virtual Value read(const StorageKey& key) = 0;
  virtual void write(const StorageKey& key, const Value& value) = 0;
  virtual void erase(const StorageKey& key) = 0;

  /// Charges one step without touching storage (loop iterations).
  virtual void charge_step() = 0;

  /// Runs `body` as a nested atomic action. Returns false if the body
  /// reverted; its effects are then undone and the caller continues.
  /// OutOfGas and AbortRetry propagate to the caller.
  virtual bool call_nested(const std::function<void(ExecutionContext&)>& body) = 0;
};

}  // namespace specmine
