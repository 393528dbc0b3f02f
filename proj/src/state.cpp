#include "specmine/state.hpp"

#include <algorithm>

#include "specmine/sha256.hpp"

namespace specmine {

State::State() : stripes_(std::make_unique<std::array<Stripe, kStripes>>()) {}

State::State(const State& other) : State() {
  for (std::size_t i = 0; i < kStripes; ++i) {
    std::lock_guard lock((*other.stripes_)[i].mutex);
    (*stripes_)[i].cells = (*other.stripes_)[i].cells;
  }
}

State& State::operator=(const State& other) {
  if (this != &other) {
    State copy(other);
    *this = std::move(copy);
  }
  return *this;
}

State::Stripe& State::stripe_for(const StorageKey& key) const {
  return (*stripes_)[StorageKeyHash{}(key) % kStripes];
}

Value State::get(const StorageKey& key) const {
  Stripe& s = stripe_for(key);
  std::lock_guard lock(s.mutex);
  auto it = s.cells.find(key);
  return it == s.cells.end() ? Value::absent() : it->second;
}

void State::put(const StorageKey& key, const Value& value) {
  Stripe& s = stripe_for(key);
  std::lock_guard lock(s.mutex);
  if (value.is_absent()) {
    s.cells.erase(key);
  } else {
    s.cells.insert_or_assign(key, value);
  }
}

std::size_t State::size() const {
  std::size_t n = 0;
  for (auto& s : *stripes_) {
    std::lock_guard lock(s.mutex);
    n += s.cells.size();
  }
  return n;
}

std::vector<StateEntry> State::snapshot() const {
  std::vector<StateEntry> entries;
  for (auto& s : *stripes_) {
    std::lock_guard lock(s.mutex);
    entries.insert(entries.end(), s.cells.begin(), s.cells.end());
  }
  std::sort(entries.begin(), entries.end(), [](const StateEntry& a, const StateEntry& b) { return a.first < b.first; });
  return entries;
}

std::string State::digest() const { return state_digest(snapshot()); }

State State::from_entries(const std::vector<StateEntry>& entries) {
  State state;
  for (const auto& [key, value] : entries) state.put(key, value);
  return state;
}

std::string canonical_encoding(const std::vector<StateEntry>& sorted_entries) {
  std::string out;
  for (const auto& [key, value] : sorted_entries) {
    key.encode(out);
    value.encode(out);
  }
  return out;
}

std::string state_digest(const std::vector<StateEntry>& sorted_entries) {
  return sha256_hex(canonical_encoding(sorted_entries));
}

}  // namespace specmine
