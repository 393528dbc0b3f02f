#include "specmine/bench.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>

#include "specmine/miner.hpp"
#include "specmine/validator.hpp"

namespace specmine {
namespace {

double time_ms(const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

// The copy of the pre-state and the check run outside the timed region.
std::vector<double> measure(const State& pre, const BenchOptions& options, const std::function<void(State&)>& run,
                            const std::function<void(const State&)>& check) {
  std::vector<double> samples;
  for (unsigned i = 0; i < options.warmups + options.repetitions; ++i) {
    State state = pre;
    const double ms = time_ms([&] { run(state); });
    check(state);
    if (i >= options.warmups) samples.push_back(ms);
  }
  return samples;
}

}  // namespace

SampleStats sample_stats(const std::vector<double>& samples) {
  SampleStats s;
  if (samples.empty()) return s;
  double sum = 0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(samples.size());
  if (samples.size() < 2) return s;
  double sq = 0;
  for (double x : samples) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(samples.size() - 1));
  return s;
}

std::vector<BenchResult> run_bench(const Workload& workload, const BenchOptions& options) {
  if (options.repetitions == 0) throw std::invalid_argument("repetitions must be at least 1");

  MinerOptions mopts;
  mopts.workers = options.workers;
  mopts.work_per_step = options.work_per_step;
  State mined_state = workload.initial;
  const Block block = mine_in_parallel(mined_state, workload.txs, mopts);
  const std::vector<TxRequest> ordered = in_serial_order(block);

  auto expect_digest = [&](const char* mode) {
    return [&block, mode](const State& s) {
      if (s.digest() != block.post_state_digest) {
        throw BenchError(std::string(mode) + " post-state digest differs from the mined block");
      }
    };
  };

  const auto serial = measure(
      workload.initial, options, [&](State& s) { execute_serial(s, ordered, options.work_per_step); },
      expect_digest("serial"));

  // Contended runs may settle on another serial order; each must match its own.
  Block last;
  const auto miner = measure(
      workload.initial, options, [&](State& s) { last = mine_in_parallel(s, workload.txs, mopts); },
      [&](const State& s) {
        State check = workload.initial;
        if (s.digest() != last.post_state_digest ||
            execute_serial(check, in_serial_order(last)).digest != last.post_state_digest) {
          throw BenchError("miner post-state is not the serial result of its published order");
        }
      });

  ValidatorOptions vopts{options.workers, options.work_per_step};
  VerificationResult verdict;
  const auto validator = measure(
      workload.initial, options, [&](State& s) { verdict = replay(block, s, vopts); },
      [&](const State& s) {
        if (!verdict.accepted()) {
          throw BenchError("validator rejected a mined block: " + std::string(to_string(verdict.rejection->reason)) +
                           ": " + verdict.rejection->detail);
        }
        expect_digest("validator")(s);
      });

  const SampleStats base = sample_stats(serial);
  std::vector<BenchResult> rows;
  auto add = [&](const char* mode, const std::vector<double>& samples) {
    const SampleStats st = sample_stats(samples);
    BenchResult r;
    r.benchmark = std::string(to_string(workload.spec.benchmark));
    r.mode = mode;
    r.block_size = workload.spec.block_size;
    r.conflict_pct = workload.spec.conflict_pct;
    r.workers = options.workers;
    r.mean_ms = st.mean;
    r.stddev_ms = st.stddev;
    r.speedup = &samples == &serial ? 1.0 : base.mean / st.mean;
    rows.push_back(r);
  };
  add("serial", serial);
  add("miner", miner);
  add("validator", validator);
  return rows;
}

SweepKind parse_sweep(std::string_view name) {
  if (name == "blocksize") return SweepKind::kBlockSize;
  if (name == "conflict") return SweepKind::kConflict;
  throw std::invalid_argument("unknown sweep: " + std::string(name));
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> sweep_points(SweepKind kind) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> points;
  if (kind == SweepKind::kBlockSize) {
    for (std::uint32_t b : {10, 25, 50, 100, 200, 300, 400}) points.emplace_back(b, 15);
  } else {
    for (std::uint32_t p = 0; p <= 100; p += 10) points.emplace_back(200, p);
  }
  return points;
}

std::vector<BenchResult> run_sweep(SweepKind kind, Benchmark benchmark, std::uint64_t seed,
                                   const BenchOptions& options) {
  std::vector<BenchResult> rows;
  for (const auto& [size, pct] : sweep_points(kind)) {
    const Workload w = gen_workload({benchmark, size, pct, seed});
    for (auto& r : run_bench(w, options)) rows.push_back(std::move(r));
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<BenchResult>& rows) {
  out << kCsvHeader << '\n';
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(6);
  for (const auto& r : rows) {
    out << r.benchmark << ',' << r.mode << ',' << r.block_size << ',' << r.conflict_pct << ',' << r.workers << ','
        << r.mean_ms << ',' << r.stddev_ms << ',' << r.speedup << '\n';
  }
  out.flags(flags);
}

}  // namespace specmine
