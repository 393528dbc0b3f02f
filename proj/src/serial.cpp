#include "specmine/serial.hpp"

#include <limits>

#include "specmine/contracts.hpp"

namespace specmine {

Value SerialContext::read(const StorageKey& key) {
  gas_.charge();
  return state_.get(key);
}

void SerialContext::write(const StorageKey& key, const Value& value) {
  gas_.charge();
  undo_.emplace_back(key, state_.get(key));
  state_.put(key, value);
}

void SerialContext::erase(const StorageKey& key) { write(key, Value::absent()); }

void SerialContext::rollback_to(std::size_t mark) {
  while (undo_.size() > mark) {
    auto& [key, previous] = undo_.back();
    state_.put(key, previous);
    undo_.pop_back();
  }
}

bool SerialContext::call_nested(const std::function<void(ExecutionContext&)>& body) {
  const std::size_t savepoint = mark();
  try {
    body(*this);
    return true;
  } catch (const Revert&) {
    rollback_to(savepoint);
    return false;
  }
}

TxStatus run_serial_transaction(State& state, const TxRequest& tx, std::uint32_t work_per_step) {
  GasMeter gas(tx.msg.gas_limit, work_per_step);
  SerialContext ctx(state, gas);
  try {
    execute_transaction(ctx, tx);
    return TxStatus::kCommitted;
  } catch (const OutOfGas&) {
    ctx.rollback_to(0);
    return TxStatus::kOutOfGas;
  } catch (const std::exception&) {
    ctx.rollback_to(0);
    return TxStatus::kReverted;
  }
}

void run_setup(State& state, const std::function<void(ExecutionContext&)>& body) {
  GasMeter gas(std::numeric_limits<std::uint64_t>::max());
  SerialContext ctx(state, gas);
  body(ctx);
}

}  // namespace specmine
