#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "statevc/model.hpp"
#include "statevc/value.hpp"

namespace statevc {

/// Lowercase hex SHA-256 of a commit's canonical record.
class CommitId {
public:
    static constexpr std::size_t kLength = 64;

    CommitId() = default;
    explicit CommitId(std::string hex) : hex_(std::move(hex)) {}

    /// Validates length and alphabet.
    static std::optional<CommitId> parse(std::string_view text);

    const std::string& str() const noexcept { return hex_; }
    std::string short_str() const { return hex_.substr(0, 12); }
    bool empty() const noexcept { return hex_.empty(); }

    auto operator<=>(const CommitId&) const = default;

private:
    std::string hex_;
};

enum class CommitKind { Auto, Manual };

std::string_view to_string(CommitKind kind);

/// A persisted version. Variables are stored as a delta against the data
/// parent; the full environment is reconstructed through version tables.
struct Commit {
    CommitId id;
    std::optional<CommitId> code_parent;
    std::optional<CommitId> data_parent;
    CodeState code;
    std::int64_t history_len = 0;
    std::optional<HistoryEntry> history_tail;
    std::map<std::string, Value> var_delta;
    std::set<std::string> var_deleted;
    std::optional<std::string> message;
    std::optional<std::string> tag;
    std::string branch;
    std::int64_t created_at = 0;  // metadata only, not part of the digest
    CommitKind kind = CommitKind::Auto;

    bool operator==(const Commit&) const = default;
};

/// Live variable -> commit that last changed it.
using VariableVersionTable = std::map<std::string, CommitId>;

struct ChangedVariables {
    std::set<std::string> changed;
    std::set<std::string> deleted;

    bool operator==(const ChangedVariables&) const = default;
};

/// Both heads of the live session; they differ after an execution rollback.
struct Head {
    CommitId code;
    CommitId data;

    bool split() const { return code != data; }
    bool operator==(const Head&) const = default;
};

using BranchMap = std::map<std::string, CommitId>;

}  // namespace statevc

template <>
struct std::hash<statevc::CommitId> {
    std::size_t operator()(const statevc::CommitId& id) const noexcept { return std::hash<std::string>{}(id.str()); }
};
