#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "specmine/value.hpp"

namespace specmine {

using StateEntry = std::pair<StorageKey, Value>;

/// Contract storage for every contract. Internally striped so that workers
/// touching distinct keys only contend on a short per-stripe critical section.
/// Semantic isolation between transactions is not this class's job; the
/// speculative store and the fork-join replay provide it.
class State {
 public:
  State();
  State(const State& other);
  State& operator=(const State& other);
  State(State&&) noexcept = default;
  State& operator=(State&&) noexcept = default;

  /// Returns absent for unbound keys.
  Value get(const StorageKey& key) const;
  /// Binding a key to absent removes it.
  void put(const StorageKey& key, const Value& value);

  std::size_t size() const;

  /// Sorted by StorageKey; the canonical view of the state.
  std::vector<StateEntry> snapshot() const;

  /// Lowercase hex SHA-256 over the canonical encoding of snapshot().
  std::string digest() const;

  static State from_entries(const std::vector<StateEntry>& entries);

 private:
  static constexpr std::size_t kStripes = 64;

  struct Stripe {
    mutable std::mutex mutex;
    std::unordered_map<StorageKey, Value, StorageKeyHash> cells;
  };

  Stripe& stripe_for(const StorageKey& key) const;

  std::unique_ptr<std::array<Stripe, kStripes>> stripes_;
};

/// Concatenated canonical encodings of the sorted entries. The empty state
/// encodes to the empty string.
std::string canonical_encoding(const std::vector<StateEntry>& sorted_entries);

/// Lowercase hex digest of a state given as sorted entries.
std::string state_digest(const std::vector<StateEntry>& sorted_entries);

}  // namespace specmine
