#include "specmine/value.hpp"

#include <stdexcept>

namespace specmine {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

void put_string(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Length-then-content, matching how length-prefixed strings compare bytewise.
std::strong_ordering compare_prefixed(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  const int c = a.compare(b);
  return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
}

}  // namespace

std::string to_hex(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

std::string from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("hex string has odd length");
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_nibble(hex[i]);
    const int lo = hex_nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex character");
    out.push_back(static_cast<char>((hi << 4) | lo));
  }
  return out;
}

Address Address::from_seed(std::uint64_t seed) {
  std::uint64_t state = seed;
  Bytes bytes{};
  for (std::size_t i = 0; i < kSize; i += 8) {
    const std::uint64_t word = splitmix64(state);
    for (std::size_t j = 0; j < 8 && i + j < kSize; ++j) bytes[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
  }
  return Address(bytes);
}

Address Address::from_hex(std::string_view hex) {
  if (hex.size() != 2 * kSize) throw std::invalid_argument("address must be 40 hex characters");
  const std::string raw = specmine::from_hex(hex);
  Bytes bytes{};
  for (std::size_t i = 0; i < kSize; ++i) bytes[i] = static_cast<std::uint8_t>(raw[i]);
  return Address(bytes);
}

std::string Address::hex() const {
  return to_hex(std::string_view(reinterpret_cast<const char*>(bytes_.data()), bytes_.size()));
}

void Value::encode(std::string& out) const {
  out.push_back(static_cast<char>(kind()));
  switch (kind()) {
    case Kind::kAbsent:
      break;
    case Kind::kInteger:
      put_u64(out, static_cast<std::uint64_t>(as_integer()));
      break;
    case Kind::kBoolean:
      out.push_back(as_boolean() ? 1 : 0);
      break;
    case Kind::kAddress:
      out.append(reinterpret_cast<const char*>(as_address().bytes().data()), Address::kSize);
      break;
    case Kind::kBytes:
      put_string(out, as_bytes());
      break;
  }
}

std::strong_ordering Value::operator<=>(const Value& other) const {
  if (kind() != other.kind()) return static_cast<int>(kind()) <=> static_cast<int>(other.kind());
  switch (kind()) {
    case Kind::kAbsent:
      return std::strong_ordering::equal;
    case Kind::kInteger:
      return static_cast<std::uint64_t>(as_integer()) <=> static_cast<std::uint64_t>(other.as_integer());
    case Kind::kBoolean:
      return as_boolean() <=> other.as_boolean();
    case Kind::kAddress:
      return as_address() <=> other.as_address();
    case Kind::kBytes:
      return compare_prefixed(as_bytes(), other.as_bytes());
  }
  return std::strong_ordering::equal;
}

std::size_t Value::hash() const {
  std::size_t h = static_cast<std::size_t>(kind()) * 0x9e3779b97f4a7c15ULL;
  switch (kind()) {
    case Kind::kAbsent:
      break;
    case Kind::kInteger:
      h ^= std::hash<std::int64_t>{}(as_integer());
      break;
    case Kind::kBoolean:
      h ^= as_boolean() ? 1 : 2;
      break;
    case Kind::kAddress: {
      const auto& b = as_address().bytes();
      h ^= std::hash<std::string_view>{}(std::string_view(reinterpret_cast<const char*>(b.data()), b.size()));
      break;
    }
    case Kind::kBytes:
      h ^= std::hash<std::string>{}(as_bytes());
      break;
  }
  return h;
}

std::string Value::debug_string() const {
  switch (kind()) {
    case Kind::kAbsent:
      return "absent";
    case Kind::kInteger:
      return std::to_string(as_integer());
    case Kind::kBoolean:
      return as_boolean() ? "true" : "false";
    case Kind::kAddress:
      return "0x" + as_address().hex();
    case Kind::kBytes:
      return "b'" + to_hex(as_bytes()) + "'";
  }
  return {};
}

void StorageKey::encode(std::string& out) const {
  put_string(out, contract);
  put_string(out, variable);
  map_key.encode(out);
}

std::strong_ordering StorageKey::operator<=>(const StorageKey& other) const {
  if (auto c = compare_prefixed(contract, other.contract); c != 0) return c;
  if (auto c = compare_prefixed(variable, other.variable); c != 0) return c;
  return map_key <=> other.map_key;
}

std::string StorageKey::debug_string() const {
  std::string out = contract + "." + variable;
  if (!map_key.is_absent()) out += "[" + map_key.debug_string() + "]";
  return out;
}

std::size_t StorageKeyHash::operator()(const StorageKey& key) const {
  std::size_t h = std::hash<std::string>{}(key.contract);
  h = h * 31 + std::hash<std::string>{}(key.variable);
  return h * 1000003 + key.map_key.hash();
}

}  // namespace specmine
