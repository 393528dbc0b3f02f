#include "specmine/execution.hpp"

namespace specmine {

std::string_view to_string(TxStatus status) {
  switch (status) {
    case TxStatus::kCommitted:
      return "Committed";
    case TxStatus::kReverted:
      return "Reverted";
    case TxStatus::kOutOfGas:
      return "OutOfGas";
  }
  return "?";
}

TxStatus parse_tx_status(std::string_view name) {
  if (name == "Committed") return TxStatus::kCommitted;
  if (name == "Reverted") return TxStatus::kReverted;
  if (name == "OutOfGas") return TxStatus::kOutOfGas;
  throw std::invalid_argument("unknown tx status: " + std::string(name));
}

void GasMeter::burn(std::uint32_t iterations) {
  // xorshift chain the optimizer cannot drop
  volatile std::uint64_t sink = 0;
  std::uint64_t x = 0x2545f4914f6cdd1dULL ^ iterations;
  for (std::uint32_t i = 0; i < iterations; ++i) {
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
  }
  sink = x;
  (void)sink;
}

}  // namespace specmine
