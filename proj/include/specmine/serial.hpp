#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "specmine/execution.hpp"
#include "specmine/state.hpp"

namespace specmine {

/// Direct, single-threaded execution against a State. Keeps an undo log only
/// so that a reverted transaction (or nested call) can be rolled back.
class SerialContext final : public ExecutionContext {
 public:
  SerialContext(State& state, GasMeter& gas) : state_(state), gas_(gas) {}

  Value read(const StorageKey& key) override;
  void write(const StorageKey& key, const Value& value) override;
  void erase(const StorageKey& key) override;
  void charge_step() override { gas_.charge(); }
  bool call_nested(const std::function<void(ExecutionContext&)>& body) override;

  std::size_t mark() const { return undo_.size(); }
  void rollback_to(std::size_t mark);

 private:
  State& state_;
  GasMeter& gas_;
  std::vector<std::pair<StorageKey, Value>> undo_;
};

/// Runs one transaction to a terminal status; non-committed outcomes leave
/// `state` unchanged.
TxStatus run_serial_transaction(State& state, const TxRequest& tx, std::uint32_t work_per_step = 0);

/// Applies contract set-up code (constructors) directly, without a gas limit.
void run_setup(State& state, const std::function<void(ExecutionContext&)>& body);

}  // namespace specmine
