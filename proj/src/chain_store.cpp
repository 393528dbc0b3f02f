#include "specmine/chain_store.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "specmine/sha256.hpp"

namespace specmine {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ParseError(field + ": " + what); }

void expect_keys(const json& j, const std::string& field, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(field, "expected an object");
  if (j.size() != keys.size()) fail(field, "unexpected number of members");
  for (const char* k : keys) {
    if (!j.contains(k)) fail(field, std::string("missing member '") + k + "'");
  }
}

const json& member(const json& j, const char* name) { return j.at(name); }

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

std::int64_t get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<std::int64_t>();
}

std::uint64_t get_uint(const json& j, const std::string& field) {
  if (!j.is_number_unsigned()) fail(field, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string get_digest(const json& j, const std::string& field) {
  std::string s = get_string(j, field);
  const bool ok = s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
                    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
                  });
  if (!ok) fail(field, "expected 64 lowercase hex characters");
  return s;
}

const json& get_array(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array");
  return j;
}

Address get_address(const json& j, const std::string& field) {
  try {
    return Address::from_hex(get_string(j, field));
  } catch (const std::invalid_argument& e) {
    fail(field, e.what());
  }
}

TxId get_tx_id(const json& j, const std::string& field) {
  const std::uint64_t v = get_uint(j, field);
  if (v > std::numeric_limits<TxId>::max()) fail(field, "tx id out of range");
  return static_cast<TxId>(v);
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

std::uint64_t get_u64(std::string_view in) {
  std::uint64_t v = 0;
  for (unsigned char c : in.substr(0, 8)) v = (v << 8) | c;
  return v;
}

}  // namespace

// ------------------------------------------------------------------ codecs

json to_json_value(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::kAbsent:
      return nullptr;
    case Value::Kind::kInteger:
      return json{{"int", v.as_integer()}};
    case Value::Kind::kBoolean:
      return json{{"bool", v.as_boolean()}};
    case Value::Kind::kAddress:
      return json{{"address", v.as_address().hex()}};
    case Value::Kind::kBytes:
      return json{{"bytes", to_hex(v.as_bytes())}};
  }
  return nullptr;
}

Value value_from_json(const json& j, const std::string& field) {
  if (j.is_null()) return Value::absent();
  if (!j.is_object() || j.size() != 1) fail(field, "expected a single-member value object");
  const auto& [tag, payload] = *j.items().begin();
  if (tag == "int") return Value::integer(get_int(payload, field + ".int"));
  if (tag == "bool") {
    if (!payload.is_boolean()) fail(field + ".bool", "expected a boolean");
    return Value::boolean(payload.get<bool>());
  }
  if (tag == "address") return Value::address(get_address(payload, field + ".address"));
  if (tag == "bytes") {
    try {
      return Value::bytes(from_hex(get_string(payload, field + ".bytes")));
    } catch (const std::invalid_argument& e) {
      fail(field + ".bytes", e.what());
    }
  }
  fail(field, "unknown value tag '" + tag + "'");
}

json to_json_key(const StorageKey& key) {
  return json{{"contract", key.contract}, {"variable", key.variable}, {"key", to_json_value(key.map_key)}};
}

StorageKey key_from_json(const json& j, const std::string& field) {
  expect_keys(j, field, {"contract", "variable", "key"});
  return StorageKey(get_string(member(j, "contract"), field + ".contract"),
                    get_string(member(j, "variable"), field + ".variable"),
                    value_from_json(member(j, "key"), field + ".key"));
}

json to_json_tx(const TxRequest& tx) {
  json args = json::array();
  for (const auto& a : tx.args) args.push_back(to_json_value(a));
  return json{{"id", tx.tx_id},
              {"contract", tx.contract},
              {"function", tx.function},
              {"args", std::move(args)},
              {"msg", {{"sender", tx.msg.sender.hex()}, {"value", tx.msg.value}, {"gas_limit", tx.msg.gas_limit}}}};
}

TxRequest tx_from_json(const json& j, const std::string& field) {
  expect_keys(j, field, {"id", "contract", "function", "args", "msg"});
  TxRequest tx;
  tx.tx_id = get_tx_id(member(j, "id"), field + ".id");
  tx.contract = get_string(member(j, "contract"), field + ".contract");
  tx.function = get_string(member(j, "function"), field + ".function");
  const json& args = get_array(member(j, "args"), field + ".args");
  for (std::size_t i = 0; i < args.size(); ++i) {
    tx.args.push_back(value_from_json(args[i], field + ".args[" + std::to_string(i) + "]"));
  }
  const json& msg = member(j, "msg");
  expect_keys(msg, field + ".msg", {"sender", "value", "gas_limit"});
  tx.msg.sender = get_address(member(msg, "sender"), field + ".msg.sender");
  tx.msg.value = get_int(member(msg, "value"), field + ".msg.value");
  if (tx.msg.value < 0) fail(field + ".msg.value", "must be non-negative");
  tx.msg.gas_limit = get_uint(member(msg, "gas_limit"), field + ".msg.gas_limit");
  if (tx.msg.gas_limit == 0) fail(field + ".msg.gas_limit", "must be positive");
  return tx;
}

json to_json_state(const std::vector<StateEntry>& sorted_entries) {
  json out = json::array();
  for (const auto& [key, value] : sorted_entries) {
    out.push_back(json{{"key", to_json_key(key)}, {"value", to_json_value(value)}});
  }
  return out;
}

std::vector<StateEntry> state_from_json(const json& j, const std::string& field) {
  std::vector<StateEntry> entries;
  const json& arr = get_array(j, field);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    expect_keys(arr[i], f, {"key", "value"});
    entries.emplace_back(key_from_json(member(arr[i], "key"), f + ".key"),
                         value_from_json(member(arr[i], "value"), f + ".value"));
  }
  return entries;
}

// ------------------------------------------------------------------ blocks

std::string serialize_block(const Block& block) {
  json txs = json::array();
  for (const auto& tx : block.txs) txs.push_back(to_json_tx(tx));

  json statuses = json::array();
  for (TxStatus s : block.statuses) statuses.push_back(std::string(to_string(s)));

  json edges = json::array();
  for (const auto& [u, v] : block.schedule.hb.edges) edges.push_back(json::array({u, v}));

  json profiles = json::array();
  for (const auto& p : block.profiles) {
    json locks = json::array();
    for (const auto& [key, counter] : p.counters) locks.push_back(json{{"key", to_json_key(key)}, {"counter", counter}});
    profiles.push_back(json{{"tx", p.tx_id}, {"locks", std::move(locks)}});
  }

  const json doc{{"version", block.version},
                 {"parent_digest", block.parent_digest},
                 {"pre_state_digest", block.pre_state_digest},
                 {"post_state_digest", block.post_state_digest},
                 {"txs", std::move(txs)},
                 {"statuses", std::move(statuses)},
                 {"schedule",
                  {{"order", block.schedule.serial_order}, {"nodes", block.schedule.hb.nodes}, {"edges", std::move(edges)}}},
                 {"profiles", std::move(profiles)}};
  return doc.dump(1) + "\n";
}

Block parse_block(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("document: ") + e.what());
  }
  expect_keys(doc, "block",
              {"version", "parent_digest", "pre_state_digest", "post_state_digest", "txs", "statuses", "schedule",
               "profiles"});

  Block b;
  const std::uint64_t version = get_uint(member(doc, "version"), "version");
  if (version != kBlockVersion) fail("version", "unsupported version " + std::to_string(version));
  b.version = static_cast<std::uint32_t>(version);
  b.parent_digest = get_digest(member(doc, "parent_digest"), "parent_digest");
  b.pre_state_digest = get_digest(member(doc, "pre_state_digest"), "pre_state_digest");
  b.post_state_digest = get_digest(member(doc, "post_state_digest"), "post_state_digest");

  const json& txs = get_array(member(doc, "txs"), "txs");
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const std::string f = "txs[" + std::to_string(i) + "]";
    b.txs.push_back(tx_from_json(txs[i], f));
    if (b.txs.back().tx_id != i) fail(f + ".id", "tx ids must be dense and in order");
  }

  const json& statuses = get_array(member(doc, "statuses"), "statuses");
  if (statuses.size() != b.txs.size()) fail("statuses", "length differs from txs");
  for (std::size_t i = 0; i < statuses.size(); ++i) {
    const std::string f = "statuses[" + std::to_string(i) + "]";
    try {
      b.statuses.push_back(parse_tx_status(get_string(statuses[i], f)));
    } catch (const std::invalid_argument& e) {
      fail(f, e.what());
    }
  }

  const json& schedule = member(doc, "schedule");
  expect_keys(schedule, "schedule", {"order", "nodes", "edges"});
  const json& order = get_array(member(schedule, "order"), "schedule.order");
  for (std::size_t i = 0; i < order.size(); ++i) {
    b.schedule.serial_order.push_back(get_tx_id(order[i], "schedule.order[" + std::to_string(i) + "]"));
  }
  const json& nodes = get_array(member(schedule, "nodes"), "schedule.nodes");
  if (nodes.size() != b.txs.size()) fail("schedule.nodes", "must list exactly the tx ids");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string f = "schedule.nodes[" + std::to_string(i) + "]";
    b.schedule.hb.nodes.push_back(get_tx_id(nodes[i], f));
    if (b.schedule.hb.nodes.back() != i) fail(f, "must list exactly the tx ids in ascending order");
  }
  const json& edges = get_array(member(schedule, "edges"), "schedule.edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string f = "schedule.edges[" + std::to_string(i) + "]";
    if (!edges[i].is_array() || edges[i].size() != 2) fail(f, "expected a [from, to] pair");
    const TxId u = get_tx_id(edges[i][0], f);
    const TxId v = get_tx_id(edges[i][1], f);
    if (u >= b.txs.size() || v >= b.txs.size()) fail(f, "edge endpoint is not a tx id");
    b.schedule.hb.edges.emplace(u, v);
  }

  const json& profiles = get_array(member(doc, "profiles"), "profiles");
  if (profiles.size() != b.txs.size()) fail("profiles", "must contain one profile per tx");
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const std::string f = "profiles[" + std::to_string(i) + "]";
    expect_keys(profiles[i], f, {"tx", "locks"});
    LockProfile p;
    p.tx_id = get_tx_id(member(profiles[i], "tx"), f + ".tx");
    if (p.tx_id != i) fail(f + ".tx", "profiles must cover the tx ids in order");
    const json& locks = get_array(member(profiles[i], "locks"), f + ".locks");
    for (std::size_t k = 0; k < locks.size(); ++k) {
      const std::string lf = f + ".locks[" + std::to_string(k) + "]";
      expect_keys(locks[k], lf, {"key", "counter"});
      const std::uint64_t counter = get_uint(member(locks[k], "counter"), lf + ".counter");
      if (counter == 0 || counter > std::numeric_limits<std::uint32_t>::max()) fail(lf + ".counter", "out of range");
      if (!p.counters.emplace(key_from_json(member(locks[k], "key"), lf + ".key"), counter).second) {
        fail(lf + ".key", "duplicate lock in profile");
      }
    }
    b.profiles.push_back(std::move(p));
  }
  return b;
}

// ------------------------------------------------------------------- chain

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Block> load_chain(const std::filesystem::path& chain_path) {
  std::vector<Block> chain;
  if (!std::filesystem::exists(chain_path)) return chain;
  const std::string data = read_file(chain_path);
  std::string_view rest(data);
  std::string expected_parent = kGenesisDigest;
  for (std::size_t index = 0; !rest.empty(); ++index) {
    const std::string where = "record " + std::to_string(index) + ": ";
    if (rest.size() < 8 + 32) throw ChainError(where + "truncated header");
    const std::uint64_t len = get_u64(rest);
    const std::string_view checksum = rest.substr(8, 32);
    rest.remove_prefix(8 + 32);
    if (rest.size() < len) throw ChainError(where + "truncated payload");
    const std::string_view payload = rest.substr(0, len);
    rest.remove_prefix(len);
    if (sha256(payload) != checksum) throw ChainError(where + "checksum mismatch");
    Block b;
    try {
      b = parse_block(payload);
    } catch (const ParseError& e) {
      throw ChainError(where + e.what());
    }
    if (b.parent_digest != expected_parent) throw ChainError(where + "parent digest does not match previous block");
    expected_parent = b.post_state_digest;
    chain.push_back(std::move(b));
  }
  return chain;
}

void append_block(const std::filesystem::path& chain_path, const Block& block) {
  const std::vector<Block> chain = load_chain(chain_path);
  const std::string& tip = chain.empty() ? kGenesisDigest : chain.back().post_state_digest;
  if (block.parent_digest != tip) throw ChainError("parent digest " + block.parent_digest + " does not extend tip " + tip);

  const std::string payload = serialize_block(block);
  std::string record;
  put_u64(record, payload.size());
  record += sha256(payload);
  record += payload;

  std::ofstream out(chain_path, std::ios::binary | std::ios::app);
  if (!out) throw ChainError("cannot open chain file " + chain_path.string());
  out.write(record.data(), static_cast<std::streamsize>(record.size()));
  if (!out) throw ChainError("write failed for " + chain_path.string());
}

}  // namespace specmine
