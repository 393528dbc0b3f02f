#include "specmine/contracts.hpp"

#include <variant>

namespace specmine {
namespace {

std::int64_t read_int(ExecutionContext& ctx, const StorageKey& key) {
  const Value v = ctx.read(key);
  return v.is_absent() ? 0 : v.as_integer();
}

bool read_bool(ExecutionContext& ctx, const StorageKey& key) {
  const Value v = ctx.read(key);
  return !v.is_absent() && v.as_boolean();
}

std::optional<Address> read_address(ExecutionContext& ctx, const StorageKey& key) {
  const Value v = ctx.read(key);
  if (v.is_absent()) return std::nullopt;
  return v.as_address();
}

void add_int(ExecutionContext& ctx, const StorageKey& key, std::int64_t delta) {
  ctx.write(key, Value::integer(read_int(ctx, key) + delta));
}

void expect_arity(const TxRequest& tx, std::size_t n) {
  if (tx.args.size() != n) throw Revert("wrong number of arguments for " + tx.function);
}

}  // namespace

ContractKind contract_kind(std::string_view contract_id) {
  const std::string_view kind = contract_id.substr(0, contract_id.find('/'));
  if (kind == "ballot") return ContractKind::kBallot;
  if (kind == "auction") return ContractKind::kAuction;
  if (kind == "etherdoc") return ContractKind::kEtherDoc;
  if (kind == "proxy") return ContractKind::kProxy;
  throw Revert("unknown contract: " + std::string(contract_id));
}

// ---------------------------------------------------------------- Ballot

void Ballot::init(ExecutionContext& ctx, const Address& chair, const std::vector<std::string>& proposal_names) const {
  if (!ctx.read(field("chairperson")).is_absent()) throw SetupError("ballot " + id_ + " already initialized");
  ctx.write(field("chairperson"), Value::address(chair));
  ctx.write(voter_weight(chair), Value::integer(1));
  for (std::size_t i = 0; i < proposal_names.size(); ++i) {
    const auto idx = static_cast<std::int64_t>(i);
    ctx.write(proposal_name(idx), Value::bytes(proposal_names[i]));
    ctx.write(proposal_vote_count(idx), Value::integer(0));
  }
  ctx.write(field("proposals.length"), Value::integer(static_cast<std::int64_t>(proposal_names.size())));
}

void Ballot::give_right_to_vote(ExecutionContext& ctx, const MsgContext& msg, const Address& voter) const {
  const auto chair = read_address(ctx, field("chairperson"));
  if (!chair || msg.sender != *chair || read_bool(ctx, voter_voted(voter))) throw Revert("giveRightToVote denied");
  ctx.write(voter_weight(voter), Value::integer(1));
}

void Ballot::vote(ExecutionContext& ctx, const MsgContext& msg, std::int64_t proposal) const {
  const Address& sender = msg.sender;
  if (read_bool(ctx, voter_voted(sender))) throw Revert("already voted");
  ctx.write(voter_voted(sender), Value::boolean(true));
  ctx.write(voter_vote(sender), Value::integer(proposal));
  const Value count = ctx.read(proposal_vote_count(proposal));
  if (count.is_absent()) throw Revert("proposal out of range");
  const std::int64_t weight = read_int(ctx, voter_weight(sender));
  ctx.write(proposal_vote_count(proposal), Value::integer(count.as_integer() + weight));
}

void Ballot::delegate(ExecutionContext& ctx, const MsgContext& msg, Address to) const {
  const Address& sender = msg.sender;
  if (read_bool(ctx, voter_voted(sender))) throw Revert("already voted");
  if (to == sender) throw Revert("self-delegation is disallowed");

  // Follow the chain to its end; reaching the sender again is a loop.
  for (auto next = read_address(ctx, voter_delegate(to)); next; next = read_address(ctx, voter_delegate(to))) {
    ctx.charge_step();
    if (*next == sender) throw Revert("found loop in delegation");
    to = *next;
  }

  ctx.write(voter_voted(sender), Value::boolean(true));
  ctx.write(voter_delegate(sender), Value::address(to));
  const std::int64_t weight = read_int(ctx, voter_weight(sender));
  if (read_bool(ctx, voter_voted(to))) {
    const std::int64_t chosen = ctx.read(voter_vote(to)).as_integer();
    add_int(ctx, proposal_vote_count(chosen), weight);
  } else {
    add_int(ctx, voter_weight(to), weight);
  }
}

std::int64_t Ballot::winning_proposal(ExecutionContext& ctx) const {
  const std::int64_t n = read_int(ctx, field("proposals.length"));
  if (n == 0) throw QueryError("ballot " + id_ + " has no proposals");
  std::int64_t winner = 0;
  std::int64_t winning_count = 0;
  for (std::int64_t p = 0; p < n; ++p) {
    const std::int64_t c = read_int(ctx, proposal_vote_count(p));
    if (c > winning_count) {
      winning_count = c;
      winner = p;
    }
  }
  return winner;
}

std::string Ballot::winner_name(ExecutionContext& ctx) const {
  return ctx.read(proposal_name(winning_proposal(ctx))).as_bytes();
}

// --------------------------------------------------------- SimpleAuction

void SimpleAuction::init(ExecutionContext& ctx, const Address& owner) const {
  if (!ctx.read(field("owner")).is_absent()) throw SetupError("auction " + id_ + " already initialized");
  ctx.write(field("owner"), Value::address(owner));
  ctx.write(highest_bid(), Value::integer(0));
}

void SimpleAuction::place_bid(ExecutionContext& ctx, const Address& bidder, std::int64_t amount) const {
  const std::int64_t highest = read_int(ctx, highest_bid());
  if (amount <= highest) throw Revert("bid not high enough");
  if (const auto previous = read_address(ctx, highest_bidder())) {
    add_int(ctx, pending_returns(*previous), highest);
  }
  ctx.write(highest_bidder(), Value::address(bidder));
  ctx.write(highest_bid(), Value::integer(amount));
}

void SimpleAuction::bid(ExecutionContext& ctx, const MsgContext& msg, std::int64_t amount) const {
  if (amount != msg.value) throw Revert("bid amount must equal msg.value");
  place_bid(ctx, msg.sender, amount);
}

void SimpleAuction::bid_plus_one(ExecutionContext& ctx, const MsgContext& msg) const {
  place_bid(ctx, msg.sender, read_int(ctx, highest_bid()) + 1);
}

void SimpleAuction::withdraw(ExecutionContext& ctx, const MsgContext& msg) const {
  const std::int64_t amount = read_int(ctx, pending_returns(msg.sender));
  if (amount == 0) return;
  ctx.write(pending_returns(msg.sender), Value::integer(0));
  add_int(ctx, balance(msg.sender), amount);
}

// -------------------------------------------------------------- EtherDoc

void EtherDoc::init(ExecutionContext& ctx, const Address& creator) const {
  if (!ctx.read(field("creator")).is_absent()) throw SetupError("etherdoc " + id_ + " already initialized");
  ctx.write(field("creator"), Value::address(creator));
}

void EtherDoc::create(ExecutionContext& ctx, const MsgContext& msg, const std::string& hashcode) const {
  if (read_bool(ctx, doc_exists(hashcode))) throw Revert("document already registered");
  ctx.write(doc_exists(hashcode), Value::boolean(true));
  ctx.write(doc_owner(hashcode), Value::address(msg.sender));
  add_int(ctx, owned_count(msg.sender), 1);
}

bool EtherDoc::exists(ExecutionContext& ctx, const MsgContext&, const std::string& hashcode) const {
  return read_bool(ctx, doc_exists(hashcode));
}

void EtherDoc::transfer(ExecutionContext& ctx, const MsgContext& msg, const std::string& hashcode,
                        const Address& new_owner) const {
  if (!read_bool(ctx, doc_exists(hashcode))) throw Revert("no such document");
  const auto owner = read_address(ctx, doc_owner(hashcode));
  if (!owner || *owner != msg.sender) throw Revert("only the owner may transfer");
  ctx.write(doc_owner(hashcode), Value::address(new_owner));
  add_int(ctx, owned_count(*owner), -1);
  add_int(ctx, owned_count(new_owner), 1);
}

// ----------------------------------------------------------------- Proxy

void Proxy::vote_via(ExecutionContext& ctx, const MsgContext& msg, const std::string& ballot_id,
                     std::int64_t proposal) const {
  add_int(ctx, calls(msg.sender), 1);
  const Ballot ballot(ballot_id);
  const bool ok = ctx.call_nested([&](ExecutionContext& inner) { ballot.vote(inner, msg, proposal); });
  if (!ok) ctx.write(failed(msg.sender), Value::boolean(true));
}

// -------------------------------------------------------------- dispatch

void execute_transaction(ExecutionContext& ctx, const TxRequest& tx) {
  try {
    switch (contract_kind(tx.contract)) {
      case ContractKind::kBallot: {
        const Ballot c(tx.contract);
        if (tx.function == "vote") {
          expect_arity(tx, 1);
          return c.vote(ctx, tx.msg, tx.args[0].as_integer());
        }
        if (tx.function == "delegate") {
          expect_arity(tx, 1);
          return c.delegate(ctx, tx.msg, tx.args[0].as_address());
        }
        if (tx.function == "giveRightToVote") {
          expect_arity(tx, 1);
          return c.give_right_to_vote(ctx, tx.msg, tx.args[0].as_address());
        }
        break;
      }
      case ContractKind::kAuction: {
        const SimpleAuction c(tx.contract);
        if (tx.function == "bid") {
          expect_arity(tx, 1);
          return c.bid(ctx, tx.msg, tx.args[0].as_integer());
        }
        if (tx.function == "bidPlusOne") {
          expect_arity(tx, 0);
          return c.bid_plus_one(ctx, tx.msg);
        }
        if (tx.function == "withdraw") {
          expect_arity(tx, 0);
          return c.withdraw(ctx, tx.msg);
        }
        break;
      }
      case ContractKind::kEtherDoc: {
        const EtherDoc c(tx.contract);
        if (tx.function == "create") {
          expect_arity(tx, 1);
          return c.create(ctx, tx.msg, tx.args[0].as_bytes());
        }
        if (tx.function == "exists") {
          expect_arity(tx, 1);
          c.exists(ctx, tx.msg, tx.args[0].as_bytes());
          return;
        }
        if (tx.function == "transfer") {
          expect_arity(tx, 2);
          return c.transfer(ctx, tx.msg, tx.args[0].as_bytes(), tx.args[1].as_address());
        }
        break;
      }
      case ContractKind::kProxy: {
        const Proxy c(tx.contract);
        if (tx.function == "voteVia") {
          expect_arity(tx, 2);
          const std::string& target = tx.args[0].as_bytes();
          if (contract_kind(target) != ContractKind::kBallot) throw Revert("voteVia target is not a ballot");
          return c.vote_via(ctx, tx.msg, target, tx.args[1].as_integer());
        }
        break;
      }
    }
  } catch (const std::bad_variant_access&) {
    throw Revert("argument type mismatch in " + tx.function);
  }
  throw Revert("unknown function " + tx.contract + "." + tx.function);
}

}  // namespace specmine
