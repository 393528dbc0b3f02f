#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "specmine/workload.hpp"

namespace specmine {

/// The validator rejected an honestly mined block, or mode post-states differ.
class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchResult {
  std::string benchmark;
  std::string mode;  // serial, miner or validator
  std::uint32_t block_size = 0;
  std::uint32_t conflict_pct = 0;
  unsigned workers = 0;
  double mean_ms = 0;
  double stddev_ms = 0;
  double speedup = 0;  // serial mean / this mean
};

struct SampleStats {
  double mean = 0;
  double stddev = 0;  // n - 1 denominator; 0 for a single sample
};

SampleStats sample_stats(const std::vector<double>& samples);

// Iterations of busywork per gas step, standing in for interpreter cost.
inline constexpr std::uint32_t kDefaultStepWork = 5000;

struct BenchOptions {
  unsigned workers = 3;
  unsigned repetitions = 5;
  unsigned warmups = 3;
  std::uint32_t work_per_step = kDefaultStepWork;
};

/// Times serial execution, the parallel miner and the validator on one
/// workload, each from a fresh copy of the pre-state. The block is mined once
/// up front; serial runs follow its serial order and the validator replays it.
std::vector<BenchResult> run_bench(const Workload& workload, const BenchOptions& options);

enum class SweepKind { kBlockSize, kConflict };

/// Throws std::invalid_argument for names other than "blocksize" and "conflict".
SweepKind parse_sweep(std::string_view name);

/// (block_size, conflict_pct) points of a sweep.
std::vector<std::pair<std::uint32_t, std::uint32_t>> sweep_points(SweepKind kind);

std::vector<BenchResult> run_sweep(SweepKind kind, Benchmark benchmark, std::uint64_t seed,
                                   const BenchOptions& options);

inline constexpr const char* kCsvHeader = "benchmark,mode,block_size,conflict_pct,workers,mean_ms,stddev_ms,speedup";

void write_csv(std::ostream& out, const std::vector<BenchResult>& rows);

}  // namespace specmine
