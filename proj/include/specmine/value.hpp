#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>

namespace specmine {

/// Account identifier. Rendered as 40 lowercase hex characters.
class Address {
 public:
  static constexpr std::size_t kSize = 20;
  using Bytes = std::array<std::uint8_t, kSize>;

  Address() = default;
  explicit Address(const Bytes& bytes) : bytes_(bytes) {}

  /// Deterministic address derived from a 64-bit seed (used by generators and tests).
  static Address from_seed(std::uint64_t seed);
  /// Parses 40 hex characters; throws std::invalid_argument otherwise.
  static Address from_hex(std::string_view hex);

  std::string hex() const;
  const Bytes& bytes() const { return bytes_; }

  auto operator<=>(const Address&) const = default;
  bool operator==(const Address&) const = default;

 private:
  Bytes bytes_{};
};

/// Opaque byte string (document hashcodes, proposal names).
struct Bytes {
  std::string data;

  auto operator<=>(const Bytes&) const = default;
  bool operator==(const Bytes&) const = default;
};

/// Contents of one storage cell. `absent` marks an unbound mapping key.
class Value {
 public:
  enum class Kind : std::uint8_t { kAbsent = 0, kInteger = 1, kBoolean = 2, kAddress = 3, kBytes = 4 };

  Value() = default;

  static Value absent() { return Value(); }
  static Value integer(std::int64_t v) { return Value(Repr(v)); }
  static Value boolean(bool v) { return Value(Repr(v)); }
  static Value address(const Address& a) { return Value(Repr(a)); }
  static Value bytes(std::string data) { return Value(Repr(Bytes{std::move(data)})); }

  Kind kind() const { return static_cast<Kind>(repr_.index()); }
  bool is_absent() const { return kind() == Kind::kAbsent; }

  /// Typed accessors throw std::bad_variant_access on kind mismatch.
  std::int64_t as_integer() const { return std::get<std::int64_t>(repr_); }
  bool as_boolean() const { return std::get<bool>(repr_); }
  const Address& as_address() const { return std::get<Address>(repr_); }
  const std::string& as_bytes() const { return std::get<Bytes>(repr_).data; }

  /// Appends the canonical byte encoding: tag byte followed by the payload
  /// (8-byte big-endian integer, 1-byte boolean, 20-byte address, or
  /// 4-byte big-endian length plus data).
  void encode(std::string& out) const;

  std::string debug_string() const;

  bool operator==(const Value&) const = default;
  /// Orders exactly as the canonical encodings compare bytewise.
  std::strong_ordering operator<=>(const Value& other) const;

  std::size_t hash() const;

 private:
  using Repr = std::variant<std::monostate, std::int64_t, bool, Address, Bytes>;
  explicit Value(Repr r) : repr_(std::move(r)) {}
  Repr repr_;
};

/// Semantic address of one state cell. Operations on distinct keys commute,
/// so each key doubles as the identity of one abstract lock.
struct StorageKey {
  std::string contract;
  std::string variable;
  Value map_key;  // absent for a plain scalar variable

  StorageKey() = default;
  StorageKey(std::string c, std::string v, Value k = Value::absent())
      : contract(std::move(c)), variable(std::move(v)), map_key(std::move(k)) {}

  void encode(std::string& out) const;
  std::string debug_string() const;

  bool operator==(const StorageKey&) const = default;
  std::strong_ordering operator<=>(const StorageKey& other) const;
};

struct StorageKeyHash {
  std::size_t operator()(const StorageKey& key) const;
};

std::string to_hex(std::string_view bytes);
/// Throws std::invalid_argument on odd length or non-hex characters.
std::string from_hex(std::string_view hex);

}  // namespace specmine
