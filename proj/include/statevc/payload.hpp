#pragma once

// JSON documents shared by the HTTP API and `statevc --json`. Field names
// are stable; see docs/api.md.

#include <optional>
#include <string>
#include <vector>

#include "statevc/codec.hpp"
#include "statevc/commit_store.hpp"
#include "statevc/diff.hpp"
#include "statevc/error.hpp"
#include "statevc/history_graph.hpp"
#include "statevc/session.hpp"

namespace statevc::payload {

using codec::Json;

Json graph(const CommitStore& store, const std::optional<Head>& head, bool fold);
Json commit(const CommitStore& store, const CommitId& id);

struct VariablePage {
    std::size_t page = 0;
    std::size_t page_size = 50;
    std::string filter;
    std::size_t repr_cap = 256;
};

/// Variables sorted by name; names containing `filter` (ASCII
/// case-insensitive) are pinned to the front.
Json variables(const Environment& env, const VariablePage& request);

/// Cuts `text` to at most `cap` bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(const std::string& text, std::size_t cap, bool* truncated);

Json diff(const CommitStore& store, const CommitId& a, const CommitId& b);
Json search(const std::vector<CommitId>& ids);
Json head(const Session& session);
Json notebook(const Session& session);
Json error(const Error& e);

/// Cell-array text format used by `export` and fixtures:
/// {"cells": [{"id", "kind", "source", "output", "error", "counter"}, ...]}
std::string notebook_text(const CodeState& code);
CodeState notebook_from_text(std::string_view text);

Json to_json(const CodeDiff& d);
Json to_json(const VariableDiff& d);
Json to_json(const GraphRow& row);

}  // namespace statevc::payload
