#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "specmine/execution.hpp"
#include "specmine/value.hpp"

namespace specmine {

/// Contract set up twice, or set up with inconsistent parameters.
class SetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A read-only query that has no answer (e.g. winner of an empty ballot).
class QueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contract instances are identified by string ids of the form
/// `<kind>` or `<kind>/<instance>`, e.g. "ballot" or "ballot/2".
enum class ContractKind { kBallot, kAuction, kEtherDoc, kProxy };

/// Throws Revert for ids whose kind is unknown.
ContractKind contract_kind(std::string_view contract_id);

// Scalar fields of every contract live in one mapping keyed by field name.
inline constexpr const char* kFieldsVariable = "fields";

/// Voting with delegation. Voter and proposal structs are stored one field
/// per mapping so that each field is its own abstract lock.
class Ballot {
 public:
  explicit Ballot(std::string id) : id_(std::move(id)) {}

  void init(ExecutionContext& ctx, const Address& chair, const std::vector<std::string>& proposal_names) const;
  void give_right_to_vote(ExecutionContext& ctx, const MsgContext& msg, const Address& voter) const;
  void vote(ExecutionContext& ctx, const MsgContext& msg, std::int64_t proposal) const;
  void delegate(ExecutionContext& ctx, const MsgContext& msg, Address to) const;

  /// First index with the strictly greatest vote count.
  std::int64_t winning_proposal(ExecutionContext& ctx) const;
  std::string winner_name(ExecutionContext& ctx) const;

  StorageKey field(const std::string& name) const { return {id_, kFieldsVariable, Value::bytes(name)}; }
  StorageKey voter_weight(const Address& a) const { return {id_, "voters.weight", Value::address(a)}; }
  StorageKey voter_voted(const Address& a) const { return {id_, "voters.voted", Value::address(a)}; }
  StorageKey voter_delegate(const Address& a) const { return {id_, "voters.delegate", Value::address(a)}; }
  StorageKey voter_vote(const Address& a) const { return {id_, "voters.vote", Value::address(a)}; }
  StorageKey proposal_name(std::int64_t i) const { return {id_, "proposals.name", Value::integer(i)}; }
  StorageKey proposal_vote_count(std::int64_t i) const { return {id_, "proposals.voteCount", Value::integer(i)}; }

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Open auction with pull-based refunds. Withdrawn funds are credited to a
/// per-address balance ledger kept in contract state.
class SimpleAuction {
 public:
  explicit SimpleAuction(std::string id) : id_(std::move(id)) {}

  void init(ExecutionContext& ctx, const Address& owner) const;
  /// `amount` must equal msg.value.
  void bid(ExecutionContext& ctx, const MsgContext& msg, std::int64_t amount) const;
  /// Reads the highest bid and outbids it by one.
  void bid_plus_one(ExecutionContext& ctx, const MsgContext& msg) const;
  void withdraw(ExecutionContext& ctx, const MsgContext& msg) const;

  StorageKey field(const std::string& name) const { return {id_, kFieldsVariable, Value::bytes(name)}; }
  StorageKey highest_bid() const { return field("highestBid"); }
  StorageKey highest_bidder() const { return field("highestBidder"); }
  StorageKey pending_returns(const Address& a) const { return {id_, "pendingReturns", Value::address(a)}; }
  StorageKey balance(const Address& a) const { return {id_, "balance", Value::address(a)}; }

  const std::string& id() const { return id_; }

 private:
  void place_bid(ExecutionContext& ctx, const Address& bidder, std::int64_t amount) const;
  std::string id_;
};

/// Proof-of-existence registry keyed by document hashcode.
class EtherDoc {
 public:
  explicit EtherDoc(std::string id) : id_(std::move(id)) {}

  void init(ExecutionContext& ctx, const Address& creator) const;
  void create(ExecutionContext& ctx, const MsgContext& msg, const std::string& hashcode) const;
  bool exists(ExecutionContext& ctx, const MsgContext& msg, const std::string& hashcode) const;
  void transfer(ExecutionContext& ctx, const MsgContext& msg, const std::string& hashcode, const Address& new_owner) const;

  StorageKey field(const std::string& name) const { return {id_, kFieldsVariable, Value::bytes(name)}; }
  StorageKey doc_exists(const std::string& h) const { return {id_, "docs.exists", Value::bytes(h)}; }
  StorageKey doc_owner(const std::string& h) const { return {id_, "docs.owner", Value::bytes(h)}; }
  StorageKey owned_count(const Address& a) const { return {id_, "ownedCount", Value::address(a)}; }

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Forwards a vote to a Ballot instance through a nested call, recording
/// per-sender call counts and whether the forwarded call reverted.
class Proxy {
 public:
  explicit Proxy(std::string id) : id_(std::move(id)) {}

  void vote_via(ExecutionContext& ctx, const MsgContext& msg, const std::string& ballot_id, std::int64_t proposal) const;

  StorageKey calls(const Address& a) const { return {id_, "calls", Value::address(a)}; }
  StorageKey failed(const Address& a) const { return {id_, "failed", Value::address(a)}; }

  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

/// Dispatches `tx` to its contract function. Unknown contracts, functions,
/// or malformed argument lists revert.
void execute_transaction(ExecutionContext& ctx, const TxRequest& tx);

}  // namespace specmine
