#pragma once

#include <string>
#include <string_view>

namespace specmine {

/// Raw 32-byte SHA-256 digest.
std::string sha256(std::string_view data);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace specmine
