#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "specmine/bench.hpp"
#include "specmine/chain_store.hpp"
#include "specmine/miner.hpp"
#include "specmine/validator.hpp"
#include "specmine/workload.hpp"

using namespace specmine;

namespace {

std::string tip_digest(const std::string& chain_path) {
  const auto chain = load_chain(chain_path);
  return chain.empty() ? std::string(kGenesisDigest) : chain.back().post_state_digest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speculative parallel block miner and validator"};
  app.require_subcommand(1);

  std::string benchmark = "ballot";
  std::uint32_t size = 10;
  std::uint32_t conflict = 0;
  std::uint64_t seed = 0;
  std::string out;
  auto* gen = app.add_subcommand("gen-block", "generate a workload (pre-state and transactions)");
  gen->add_option("--benchmark", benchmark)->check(CLI::IsMember({"ballot", "auction", "etherdoc", "mixed", "nested"}));
  gen->add_option("--size", size)->check(CLI::PositiveNumber);
  gen->add_option("--conflict", conflict)->check(CLI::Range(0, 100));
  gen->add_option("--seed", seed);
  gen->add_option("--out", out)->required();

  std::string in;
  unsigned workers = 3;
  std::string chain;
  std::string block_out;
  auto* mine = app.add_subcommand("mine", "mine a workload into a block and append it to a chain");
  mine->add_option("--in", in)->required()->check(CLI::ExistingFile);
  mine->add_option("--workers", workers)->check(CLI::PositiveNumber);
  mine->add_option("--chain", chain)->required();
  mine->add_option("--out", block_out, "block file (default: <in>.block.json)");

  std::string block_path;
  std::string state_path;
  auto* validate = app.add_subcommand("validate", "replay a block; exit 0 on accept, 1 on reject");
  validate->add_option("--block", block_path)->required()->check(CLI::ExistingFile);
  validate->add_option("--workers", workers)->check(CLI::PositiveNumber);
  validate->add_option("--state", state_path, "workload file holding the block's pre-state")
      ->required()
      ->check(CLI::ExistingFile);

  std::string sweep = "blocksize";
  BenchOptions bopts;
  auto* bench = app.add_subcommand("bench", "run a sweep and write CSV");
  bench->add_option("--benchmark", benchmark)->check(CLI::IsMember({"ballot", "auction", "etherdoc", "mixed", "nested"}));
  bench->add_option("--sweep", sweep)->check(CLI::IsMember({"blocksize", "conflict"}));
  bench->add_option("--workers", bopts.workers)->check(CLI::PositiveNumber);
  bench->add_option("--reps", bopts.repetitions)->check(CLI::PositiveNumber);
  bench->add_option("--warmups", bopts.warmups);
  bench->add_option("--seed", seed);
  bench->add_option("--step-work", bopts.work_per_step, "busywork iterations per gas step");
  bench->add_option("--out", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const Workload w = gen_workload({parse_benchmark(benchmark), size, conflict, seed});
      write_file(out, serialize_workload(w));
      std::cout << "wrote " << w.txs.size() << " txs (" << w.contending << " contending) to " << out << '\n';
    } else if (*mine) {
      Workload w = parse_workload(read_file(in));
      MinerOptions opts;
      opts.workers = workers;
      opts.parent_digest = tip_digest(chain);
      MiningStats stats;
      SpeculativeStore store(w.initial);
      const Block block = mine_in_parallel(store, w.txs, opts, &stats);
      if (block_out.empty()) block_out = in + ".block.json";
      write_file(block_out, serialize_block(block));
      append_block(chain, block);
      std::cout << "mined " << block.txs.size() << " txs, " << block.schedule.hb.edges.size() << " edges, "
                << stats.retries << " retries\npost " << block.post_state_digest << '\n';
    } else if (*validate) {
      const Block block = parse_block(read_file(block_path));
      Workload w = parse_workload(read_file(state_path));
      const VerificationResult r = replay(block, w.initial, {workers, 0});
      if (!r.accepted()) {
        std::cerr << "Reject: " << to_string(r.rejection->reason) << ": " << r.rejection->detail << '\n';
        return 1;
      }
      std::cout << "Accept " << r.replay_digest << '\n';
    } else if (*bench) {
      const auto rows = run_sweep(parse_sweep(sweep), parse_benchmark(benchmark), seed, bopts);
      std::ofstream file(out);
      if (!file) throw std::runtime_error("cannot open " + out);
      write_csv(file, rows);
      write_csv(std::cout, rows);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
