#pragma once

// JSON encodings shared by the on-disk log, the HTTP API and the CLI.
//
// Values: None -> null, bool -> true/false, int -> integer, str -> string,
// list -> array, float -> {"float": "<shortest repr>"} (keeps inf/nan and
// the exact bit pattern).

#include <json.hpp>
#include <string>

#include "statevc/commit.hpp"
#include "statevc/model.hpp"
#include "statevc/value.hpp"

namespace statevc::codec {

using Json = nlohmann::json;

Json to_json(const Value& v);
Value value_from_json(const Json& j);

Json to_json(const Cell& c);
Cell cell_from_json(const Json& j);

Json to_json(const CodeState& code);
CodeState code_from_json(const Json& j);

Json to_json(const HistoryEntry& h);
HistoryEntry history_entry_from_json(const Json& j);

/// The canonical, digest-covered part of a commit (no id, no timestamp).
Json commit_record(const Commit& c);
Commit commit_from_record(const Json& record, CommitId id, std::int64_t created_at);

/// Compact dump with sorted keys; the byte string the digest covers.
std::string canonical(const Json& j);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

CommitId compute_id(const Commit& c);

}  // namespace statevc::codec
