#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "specmine/block.hpp"
#include "specmine/state.hpp"

namespace specmine {

enum class Benchmark { kBallot, kAuction, kEtherDoc, kMixed, kNested };

std::string_view to_string(Benchmark b);
/// Throws std::invalid_argument for unknown names.
Benchmark parse_benchmark(std::string_view name);

struct WorkloadSpec {
  Benchmark benchmark = Benchmark::kBallot;
  std::uint32_t block_size = 10;
  std::uint32_t conflict_pct = 0;  // share of txs contending with at least one other
  std::uint64_t seed = 0;

  bool operator==(const WorkloadSpec&) const = default;
};

struct Workload {
  WorkloadSpec spec;
  std::uint32_t contending = 0;  // number of contending txs actually generated
  State initial;
  std::vector<TxRequest> txs;
};

/// Number of contending transactions for a block: the even number nearest to
/// conflict_pct * block_size / 100, rounding ties down. Contention comes in
/// pairs or larger groups, so odd counts are not realizable.
std::uint32_t contending_target(std::uint32_t block_size, std::uint32_t conflict_pct);

/// Deterministic in `spec`. Throws std::invalid_argument for a zero block
/// size or a conflict percentage above 100.
Workload gen_workload(const WorkloadSpec& spec);

/// Transactions that share at least one published lock with another
/// transaction of the block.
std::size_t count_contending(const Block& block);

std::string serialize_workload(const Workload& workload);
/// Throws ParseError.
Workload parse_workload(std::string_view text);

}  // namespace specmine
