#include "specmine/workload.hpp"

#include <array>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "specmine/chain_store.hpp"
#include "specmine/contracts.hpp"
#include "specmine/serial.hpp"
#include "specmine/sha256.hpp"

namespace specmine {
namespace {

constexpr const char* kBallotId = "ballot";
constexpr const char* kAuctionId = "auction";
constexpr const char* kEtherDocId = "etherdoc";
constexpr const char* kProxyId = "proxy";

// Stable across platforms, unlike std::hash.
Address derive_address(std::uint64_t seed, std::string_view domain, std::uint64_t index) {
  const std::string digest =
      sha256(std::string(domain) + ":" + std::to_string(seed) + ":" + std::to_string(index));
  Address::Bytes bytes{};
  for (std::size_t i = 0; i < Address::kSize; ++i) bytes[i] = static_cast<std::uint8_t>(digest[i]);
  return Address(bytes);
}

std::string derive_hashcode(std::uint64_t seed, std::uint64_t index) {
  return sha256("doc:" + std::to_string(seed) + ":" + std::to_string(index));
}

TxRequest make_tx(std::string contract, std::string function, std::vector<Value> args, const Address& sender,
                  std::int64_t value = 0) {
  TxRequest tx;
  tx.contract = std::move(contract);
  tx.function = std::move(function);
  tx.args = std::move(args);
  tx.msg.sender = sender;
  tx.msg.value = value;
  return tx;
}

// Unique single votes plus `contending / 2` voters voting twice; voter j
// votes for proposal j so only double votes share locks.
void build_ballot(State& state, std::vector<TxRequest>& txs, std::uint64_t seed, std::uint32_t size,
                  std::uint32_t contending, bool via_proxy) {
  const Ballot ballot(kBallotId);
  const Address chair = derive_address(seed, "ballot-chair", 0);
  std::vector<Address> voters;
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < size; ++i) {
    voters.push_back(derive_address(seed, "ballot-voter", i));
    names.push_back("proposal-" + std::to_string(i));
  }
  run_setup(state, [&](ExecutionContext& ctx) {
    ballot.init(ctx, chair, names);
    MsgContext msg;
    msg.sender = chair;
    for (const auto& v : voters) ballot.give_right_to_vote(ctx, msg, v);
  });

  const std::uint32_t pairs = contending / 2;
  const std::uint32_t singles = size - contending;
  auto vote = [&](std::uint32_t j) {
    if (via_proxy) {
      txs.push_back(make_tx(kProxyId, "voteVia", {Value::bytes(kBallotId), Value::integer(j)}, voters[j]));
    } else {
      txs.push_back(make_tx(kBallotId, "vote", {Value::integer(j)}, voters[j]));
    }
  };
  for (std::uint32_t j = 0; j < pairs; ++j) {
    vote(j);
    vote(j);
  }
  for (std::uint32_t j = pairs; j < pairs + singles; ++j) vote(j);
}

// Withdrawals by outbid bidders plus `contending` bidPlusOne calls on the
// shared highest-bid cell.
void build_auction(State& state, std::vector<TxRequest>& txs, std::uint64_t seed, std::uint32_t size,
                   std::uint32_t contending) {
  const SimpleAuction auction(kAuctionId);
  const std::uint32_t withdrawers = size - contending;
  run_setup(state, [&](ExecutionContext& ctx) {
    auction.init(ctx, derive_address(seed, "auction-owner", 0));
    for (std::uint32_t i = 0; i <= withdrawers; ++i) {
      // The final bidder stays highest and never withdraws.
      MsgContext msg;
      msg.sender = i < withdrawers ? derive_address(seed, "auction-bidder", i) : derive_address(seed, "auction-top", 0);
      msg.value = i + 1;
      auction.bid(ctx, msg, msg.value);
    }
  });
  for (std::uint32_t i = 0; i < withdrawers; ++i) {
    txs.push_back(make_tx(kAuctionId, "withdraw", {}, derive_address(seed, "auction-bidder", i)));
  }
  for (std::uint32_t i = 0; i < contending; ++i) {
    txs.push_back(make_tx(kAuctionId, "bidPlusOne", {}, derive_address(seed, "auction-new-bidder", i)));
  }
}

// Existence checks by owners plus `contending` transfers to the creator,
// which all update the creator's owned-count cell.
void build_etherdoc(State& state, std::vector<TxRequest>& txs, std::uint64_t seed, std::uint32_t size,
                    std::uint32_t contending) {
  const EtherDoc doc(kEtherDocId);
  const Address creator = derive_address(seed, "etherdoc-creator", 0);
  run_setup(state, [&](ExecutionContext& ctx) {
    doc.init(ctx, creator);
    for (std::uint32_t i = 0; i < size; ++i) {
      MsgContext msg;
      msg.sender = derive_address(seed, "etherdoc-owner", i);
      doc.create(ctx, msg, derive_hashcode(seed, i));
    }
  });
  const std::uint32_t checks = size - contending;
  for (std::uint32_t i = 0; i < size; ++i) {
    const Address owner = derive_address(seed, "etherdoc-owner", i);
    if (i < checks) {
      txs.push_back(make_tx(kEtherDocId, "exists", {Value::bytes(derive_hashcode(seed, i))}, owner));
    } else {
      txs.push_back(make_tx(kEtherDocId, "transfer",
                            {Value::bytes(derive_hashcode(seed, i)), Value::address(creator)}, owner));
    }
  }
}

// Fisher-Yates over mt19937_64, whose output sequence is fixed by the standard.
void shuffle(std::vector<TxRequest>& txs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = txs.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    std::swap(txs[i - 1], txs[j]);
  }
}

std::uint32_t even_floor(std::uint32_t n) { return n & ~1U; }

}  // namespace

std::string_view to_string(Benchmark b) {
  switch (b) {
    case Benchmark::kBallot:
      return "ballot";
    case Benchmark::kAuction:
      return "auction";
    case Benchmark::kEtherDoc:
      return "etherdoc";
    case Benchmark::kMixed:
      return "mixed";
    case Benchmark::kNested:
      return "nested";
  }
  return "?";
}

Benchmark parse_benchmark(std::string_view name) {
  for (Benchmark b : {Benchmark::kBallot, Benchmark::kAuction, Benchmark::kEtherDoc, Benchmark::kMixed,
                      Benchmark::kNested}) {
    if (to_string(b) == name) return b;
  }
  throw std::invalid_argument("unknown benchmark: " + std::string(name));
}

std::uint32_t contending_target(std::uint32_t block_size, std::uint32_t conflict_pct) {
  // x = pct * size / 100; result = 2 * ceil(x / 2 - 1/2) in integer arithmetic.
  const std::uint64_t scaled = std::uint64_t{conflict_pct} * block_size;
  const std::uint64_t k = scaled < 100 ? 0 : 2 * ((scaled - 100 + 199) / 200);
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(k, block_size));
}

Workload gen_workload(const WorkloadSpec& spec) {
  if (spec.block_size == 0) throw std::invalid_argument("block size must be positive");
  if (spec.conflict_pct > 100) throw std::invalid_argument("conflict percentage must be within 0..100");

  Workload w;
  w.spec = spec;
  const std::uint32_t size = spec.block_size;
  const std::uint32_t target = contending_target(size, spec.conflict_pct);

  switch (spec.benchmark) {
    case Benchmark::kBallot:
      w.contending = target;
      build_ballot(w.initial, w.txs, spec.seed, size, target, false);
      break;
    case Benchmark::kNested:
      w.contending = target;
      build_ballot(w.initial, w.txs, spec.seed, size, target, true);
      break;
    case Benchmark::kAuction:
      w.contending = target;
      build_auction(w.initial, w.txs, spec.seed, size, target);
      break;
    case Benchmark::kEtherDoc:
      w.contending = target;
      build_etherdoc(w.initial, w.txs, spec.seed, size, target);
      break;
    case Benchmark::kMixed: {
      // Thirds (remainder to ballot); contention dealt out two at a time.
      // Ballot contention comes in vote pairs; the auction and etherdoc hot
      // spots take any group of two or more, so they absorb the remainder.
      const std::uint32_t third = size / 3;
      const std::array<std::uint32_t, 3> sizes{size - 2 * third, third, third};
      const std::array<std::uint32_t, 3> caps{even_floor(sizes[0]), sizes[1], sizes[2]};
      std::array<std::uint32_t, 3> parts{0, 0, 0};
      std::uint32_t left = target;
      for (std::uint32_t turn = 0, stalled = 0; left >= 2 && stalled < 3; turn = (turn + 1) % 3) {
        if (parts[turn] + 2 <= caps[turn]) {
          parts[turn] += 2;
          left -= 2;
          stalled = 0;
        } else {
          ++stalled;
        }
      }
      for (std::size_t i = 1; i < 3; ++i) {
        while (left > 0 && parts[i] >= 2 && parts[i] < caps[i]) {
          ++parts[i];
          --left;
        }
      }
      w.contending = parts[0] + parts[1] + parts[2];
      build_ballot(w.initial, w.txs, spec.seed, sizes[0], parts[0], false);
      if (sizes[1] != 0) build_auction(w.initial, w.txs, spec.seed, sizes[1], parts[1]);
      if (sizes[2] != 0) build_etherdoc(w.initial, w.txs, spec.seed, sizes[2], parts[2]);
      break;
    }
  }

  shuffle(w.txs, spec.seed);
  for (std::size_t i = 0; i < w.txs.size(); ++i) w.txs[i].tx_id = static_cast<TxId>(i);
  return w;
}

std::size_t count_contending(const Block& block) {
  std::map<StorageKey, std::set<TxId>> holders;
  for (const auto& p : block.profiles) {
    for (const auto& [key, counter] : p.counters) holders[key].insert(p.tx_id);
  }
  std::set<TxId> contending;
  for (const auto& [key, txs] : holders) {
    if (txs.size() > 1) contending.insert(txs.begin(), txs.end());
  }
  return contending.size();
}

std::string serialize_workload(const Workload& workload) {
  nlohmann::json txs = nlohmann::json::array();
  for (const auto& tx : workload.txs) txs.push_back(to_json_tx(tx));
  const nlohmann::json doc{{"benchmark", std::string(to_string(workload.spec.benchmark))},
                           {"block_size", workload.spec.block_size},
                           {"conflict_pct", workload.spec.conflict_pct},
                           {"seed", workload.spec.seed},
                           {"contending", workload.contending},
                           {"initial_state", to_json_state(workload.initial.snapshot())},
                           {"txs", std::move(txs)}};
  return doc.dump(1) + "\n";
}

Workload parse_workload(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("workload: ") + e.what());
  }
  try {
    Workload w;
    w.spec.benchmark = parse_benchmark(doc.at("benchmark").get<std::string>());
    w.spec.block_size = doc.at("block_size").get<std::uint32_t>();
    w.spec.conflict_pct = doc.at("conflict_pct").get<std::uint32_t>();
    w.spec.seed = doc.at("seed").get<std::uint64_t>();
    w.contending = doc.at("contending").get<std::uint32_t>();
    w.initial = State::from_entries(state_from_json(doc.at("initial_state"), "initial_state"));
    const auto& txs = doc.at("txs");
    for (std::size_t i = 0; i < txs.size(); ++i) {
      w.txs.push_back(tx_from_json(txs[i], "txs[" + std::to_string(i) + "]"));
      if (w.txs.back().tx_id != i) throw ParseError("txs[" + std::to_string(i) + "].id: tx ids must be dense");
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("workload: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("workload.benchmark: ") + e.what());
  }
}

}  // namespace specmine
