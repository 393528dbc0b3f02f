#pragma once

#include <functional>
#include <string>
#include <vector>

#include "specmine/contracts.hpp"
#include "specmine/serial.hpp"
#include "specmine/state.hpp"

namespace testing {

using namespace specmine;

inline Address addr(std::uint64_t n) { return Address::from_seed(n); }

inline MsgContext from(const Address& a, std::int64_t value = 0) {
  MsgContext m;
  m.sender = a;
  m.value = value;
  return m;
}

inline TxRequest tx(TxId id, std::string contract, std::string function, std::vector<Value> args, const Address& sender,
                    std::int64_t value = 0) {
  TxRequest t;
  t.tx_id = id;
  t.contract = std::move(contract);
  t.function = std::move(function);
  t.args = std::move(args);
  t.msg = from(sender, value);
  return t;
}

// Runs `body` against `state` like a single serial transaction.
inline TxStatus run(State& state, const MsgContext& msg, const std::function<void(ExecutionContext&)>& body) {
  GasMeter gas(msg.gas_limit);
  SerialContext ctx(state, gas);
  const std::size_t mark = ctx.mark();
  try {
    body(ctx);
    return TxStatus::kCommitted;
  } catch (const OutOfGas&) {
    ctx.rollback_to(mark);
    return TxStatus::kOutOfGas;
  } catch (const Revert&) {
    ctx.rollback_to(mark);
    return TxStatus::kReverted;
  }
}

inline std::int64_t get_int(const State& s, const StorageKey& k) {
  const Value v = s.get(k);
  return v.is_absent() ? 0 : v.as_integer();
}

// Ballot "ballot" with chair addr(0), the given proposals and voters addr(1..voters).
inline State ballot_state(std::size_t proposals, std::size_t voters) {
  State s;
  const Ballot b("ballot");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < proposals; ++i) names.push_back("p" + std::to_string(i));
  run_setup(s, [&](ExecutionContext& ctx) {
    b.init(ctx, addr(0), names);
    for (std::size_t i = 1; i <= voters; ++i) b.give_right_to_vote(ctx, from(addr(0)), addr(i));
  });
  return s;
}

}  // namespace testing
