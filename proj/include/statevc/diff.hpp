#pragma once

// Line, cell and variable diffs between commits.

#include <cstddef>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "statevc/commit.hpp"
#include "statevc/model.hpp"

namespace statevc {

class CommitStore;

enum class EditKind { Keep, Insert, Delete };

std::string_view to_string(EditKind kind);

/// One step of an edit script over index sequences. Keep and Delete consume
/// `left`; Keep and Insert consume `right`.
struct EditStep {
    EditKind kind;
    std::size_t left = 0;
    std::size_t right = 0;

    bool operator==(const EditStep&) const = default;
};

/// Shortest edit script between sequences of length n and m (Myers, O(ND)).
/// Within each run of changes, deletions precede insertions.
std::vector<EditStep> shortest_edit_script(std::size_t n, std::size_t m,
                                           const std::function<bool(std::size_t, std::size_t)>& equal);

struct LineOp {
    EditKind kind;
    std::string text;

    bool operator==(const LineOp&) const = default;
};

/// Splits on '\n'. Always at least one element; join_lines inverts it.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(std::span<const std::string> lines);

std::vector<LineOp> diff_lines(std::span<const std::string> left, std::span<const std::string> right);
std::vector<LineOp> diff_text(std::string_view left, std::string_view right);

/// Replays a line script over `left`. Throws Error(BadRequest) when the
/// script does not fit.
std::string apply_lines(std::string_view left, std::span<const LineOp> ops);

enum class CellOpKind { Kept, Added, Deleted, Modified };

std::string_view to_string(CellOpKind kind);

/// Kept, Added and Modified carry the right-hand cell; Deleted carries the
/// left-hand one. Modified also carries a line script over the source.
struct CellOp {
    CellOpKind kind;
    Cell cell;
    std::vector<LineOp> line_ops;

    bool operator==(const CellOp&) const = default;
};

struct CodeDiff {
    std::vector<CellOp> ops;

    bool operator==(const CodeDiff&) const = default;
};

/// Aligns cells by id. Cells present on both sides but out of order appear
/// as a Deleted/Added pair.
CodeDiff diff_code(const CodeState& left, const CodeState& right);

/// Rebuilds the right-hand code state from the left one. Throws
/// Error(BadRequest) when the diff was not made against `left`.
CodeState apply(const CodeDiff& diff, const CodeState& left);

struct VariableDiff {
    std::set<std::string> changed;
    std::set<std::string> added_right;
    std::set<std::string> deleted_right;
    std::set<std::string> unchanged;

    bool operator==(const VariableDiff&) const = default;
};

VariableDiff diff_tables(const VariableVersionTable& left, const VariableVersionTable& right);

/// Compares version tables only; no value is loaded.
VariableDiff diff_variables(const CommitStore& store, const CommitId& a, const CommitId& b);
CodeDiff diff_code(const CommitStore& store, const CommitId& a, const CommitId& b);

}  // namespace statevc
