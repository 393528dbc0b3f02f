#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "specmine/block.hpp"
#include "specmine/state.hpp"

namespace specmine {

/// Malformed block or workload document. The message names the field.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chain file linkage or record corruption.
class ChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON codecs shared by the block and workload formats. Decoders throw
// ParseError naming `field`.
nlohmann::json to_json_value(const Value& v);
Value value_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json to_json_key(const StorageKey& key);
StorageKey key_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json to_json_tx(const TxRequest& tx);
TxRequest tx_from_json(const nlohmann::json& j, const std::string& field);
nlohmann::json to_json_state(const std::vector<StateEntry>& sorted_entries);
std::vector<StateEntry> state_from_json(const nlohmann::json& j, const std::string& field);

/// Canonical text form: JSON with sorted keys, one-space indentation, LF
/// line endings and a trailing newline. Equal blocks give equal bytes.
std::string serialize_block(const Block& block);

/// Inverse of serialize_block. Checks the block invariants (dense tx ids,
/// one status and one profile per tx, graph nodes equal tx ids).
Block parse_block(std::string_view text);

/// Appends one record (8-byte big-endian length, SHA-256 of the payload,
/// payload). The block's parent digest must equal the tip's post-state
/// digest, or the genesis digest for an empty or missing chain.
void append_block(const std::filesystem::path& chain_path, const Block& block);

/// Loads and verifies every record and the digest chain.
std::vector<Block> load_chain(const std::filesystem::path& chain_path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace specmine
