#include <doctest.h>

#include <cstdlib>

#include "helpers.hpp"
#include "specmine/miner.hpp"
#include "specmine/workload.hpp"

using namespace testing;

namespace {

constexpr Benchmark kAll[] = {Benchmark::kBallot, Benchmark::kAuction, Benchmark::kEtherDoc, Benchmark::kMixed,
                              Benchmark::kNested};

// Nearest even count to pct * size / 100, lower one on ties, by brute force.
std::uint32_t nearest_even(std::uint32_t size, std::uint32_t pct) {
  const std::int64_t target = std::int64_t{pct} * size;  // scaled by 100
  std::uint32_t best = 0;
  for (std::uint32_t k = 0; k <= size; k += 2) {
    if (std::llabs(std::int64_t{k} * 100 - target) < std::llabs(std::int64_t{best} * 100 - target)) best = k;
  }
  return best;
}

}  // namespace

TEST_CASE("contending count") {
  CHECK(contending_target(10, 15) == 2);
  CHECK(contending_target(200, 15) == 30);
  CHECK(contending_target(10, 10) == 0);
  CHECK(contending_target(10, 30) == 2);
  CHECK(contending_target(50, 15) == 8);
  CHECK(contending_target(7, 100) == 6);
  for (std::uint32_t size = 1; size <= 120; ++size) {
    for (std::uint32_t pct = 0; pct <= 100; ++pct) {
      const std::uint32_t k = contending_target(size, pct);
      CHECK(k == nearest_even(size, pct));
      CHECK(std::abs(static_cast<double>(k) - pct * size / 100.0) <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(gen_workload({Benchmark::kBallot, 0, 10, 1}), std::invalid_argument);
  CHECK_THROWS_AS(gen_workload({Benchmark::kBallot, 10, 101, 1}), std::invalid_argument);
  CHECK_THROWS_AS(parse_benchmark("lottery"), std::invalid_argument);
  for (auto b : kAll) CHECK(parse_benchmark(to_string(b)) == b);
}

TEST_CASE("generation is deterministic in its parameters") {
  for (auto b : kAll) {
    const WorkloadSpec spec{b, 37, 40, 99};
    CHECK(serialize_workload(gen_workload(spec)) == serialize_workload(gen_workload(spec)));
    CHECK(serialize_workload(gen_workload(spec)) != serialize_workload(gen_workload({b, 37, 40, 100})));
  }
}

TEST_CASE("workloads round-trip") {
  for (auto b : kAll) {
    const Workload w = gen_workload({b, 20, 50, 5});
    const Workload back = parse_workload(serialize_workload(w));
    CHECK(back.spec == w.spec);
    CHECK(back.contending == w.contending);
    CHECK(back.txs == w.txs);
    CHECK(back.initial.digest() == w.initial.digest());
  }
  CHECK_THROWS(parse_workload("{"));
  CHECK_THROWS(parse_workload("{}"));
}

TEST_CASE("generated contention matches the mined lock profiles") {
  for (auto b : kAll) {
    for (std::uint32_t size : {1U, 2U, 3U, 10U, 25U, 64U}) {
      for (std::uint32_t pct = 0; pct <= 100; pct += 10) {
        const Workload w = gen_workload({b, size, pct, size * 1000 + pct});
        REQUIRE(w.txs.size() == size);
        for (TxId i = 0; i < size; ++i) CHECK(w.txs[i].tx_id == i);
        State s = w.initial;
        const Block block = mine_in_parallel(s, w.txs, {.workers = 2});
        CHECK_MESSAGE(count_contending(block) == w.contending, to_string(b), " B=", size, " p=", pct);
        if (b != Benchmark::kMixed) {
          CHECK(w.contending == contending_target(size, pct));
        } else {
          // Tiny mixed blocks cannot pair transactions inside one contract.
          CHECK(w.contending <= contending_target(size, pct));
          if (size >= 10) CHECK(std::abs(static_cast<double>(w.contending) - pct * size / 100.0) <= 1.0);
        }
        if (pct == 0) CHECK(block.schedule.hb.edges.empty());
      }
    }
  }
}

TEST_CASE("double votes at full conflict split evenly") {
  for (std::uint32_t size : {10U, 50U, 200U}) {
    const Workload w = gen_workload({Benchmark::kBallot, size, 100, 3});
    State s = w.initial;
    const Block block = mine_in_parallel(s, w.txs, {});
    CHECK(std::count(block.statuses.begin(), block.statuses.end(), TxStatus::kCommitted) == size / 2);
    CHECK(std::count(block.statuses.begin(), block.statuses.end(), TxStatus::kReverted) == size / 2);
  }
}

TEST_CASE("benchmark transactions all commit apart from double votes") {
  for (auto b : {Benchmark::kAuction, Benchmark::kEtherDoc}) {
    const Workload w = gen_workload({b, 40, 60, 1});
    State s = w.initial;
    CHECK(execute_serial(s, w.txs).statuses == std::vector<TxStatus>(40, TxStatus::kCommitted));
  }
  const Workload w = gen_workload({Benchmark::kBallot, 40, 0, 1});
  State s = w.initial;
  CHECK(execute_serial(s, w.txs).statuses == std::vector<TxStatus>(40, TxStatus::kCommitted));
}
