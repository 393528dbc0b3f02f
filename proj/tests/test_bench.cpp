#include <doctest.h>

#include <cmath>
#include <sstream>

#include "specmine/bench.hpp"

using namespace specmine;

TEST_CASE("sample statistics") {
  const SampleStats s = sample_stats({10, 12, 11, 9, 13});
  CHECK(std::abs(s.mean - 11.0) < 1e-9);
  // Squared deviations sum to 10 over n - 1 = 4.
  CHECK(std::abs(s.stddev - std::sqrt(2.5)) < 1e-9);
  CHECK(std::abs(s.stddev - 1.5811388300841898) < 1e-9);
  CHECK(sample_stats({4.5}).stddev == 0.0);
  CHECK(sample_stats({4.5}).mean == 4.5);
  CHECK(sample_stats({}).mean == 0.0);
}

TEST_CASE("default protocol shape") {
  const BenchOptions o;
  CHECK(o.workers == 3);
  CHECK(o.repetitions == 5);
  CHECK(o.warmups == 3);
}

TEST_CASE("run_bench reports three modes against the serial mean") {
  BenchOptions o;
  o.repetitions = 2;
  o.warmups = 1;
  o.work_per_step = 10;
  const auto rows = run_bench(gen_workload({Benchmark::kMixed, 30, 20, 1}), o);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].mode == "serial");
  CHECK(rows[1].mode == "miner");
  CHECK(rows[2].mode == "validator");
  CHECK(rows[0].speedup == 1.0);
  for (const auto& r : rows) {
    CHECK(r.benchmark == "mixed");
    CHECK(r.block_size == 30);
    CHECK(r.conflict_pct == 20);
    CHECK(r.workers == 3);
    CHECK(r.mean_ms > 0);
    CHECK(r.stddev_ms >= 0);
    CHECK(std::abs(r.speedup - rows[0].mean_ms / r.mean_ms) < 1e-9);
  }
  o.repetitions = 0;
  CHECK_THROWS_AS(run_bench(gen_workload({Benchmark::kBallot, 5, 0, 1}), o), std::invalid_argument);
}

TEST_CASE("sweep points") {
  using P = std::pair<std::uint32_t, std::uint32_t>;
  CHECK(sweep_points(SweepKind::kBlockSize) ==
        std::vector<P>{{10, 15}, {25, 15}, {50, 15}, {100, 15}, {200, 15}, {300, 15}, {400, 15}});
  const auto conflict = sweep_points(SweepKind::kConflict);
  REQUIRE(conflict.size() == 11);
  for (std::size_t i = 0; i < conflict.size(); ++i) CHECK(conflict[i] == P{200, 10 * i});
  CHECK(parse_sweep("blocksize") == SweepKind::kBlockSize);
  CHECK(parse_sweep("conflict") == SweepKind::kConflict);
  CHECK_THROWS_AS(parse_sweep("size"), std::invalid_argument);
}

TEST_CASE("csv output") {
  BenchResult r{"ballot", "miner", 10, 15, 3, 1.5, 0.25, 1.2};
  std::ostringstream out;
  write_csv(out, {r});
  CHECK(out.str() ==
        "benchmark,mode,block_size,conflict_pct,workers,mean_ms,stddev_ms,speedup\n"
        "ballot,miner,10,15,3,1.500000,0.250000,1.200000\n");
}
