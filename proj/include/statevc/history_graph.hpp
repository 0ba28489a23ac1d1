#pragma once

// One-dimensional layout of the commit graph.
//
// Rows run newest first. Every commit has up to two parent edges: one
// BothParents edge when its code and data parents coincide, otherwise a
// CodeParent edge followed by a DataParent edge. Lanes are columns; a
// commit continues the lane of the first child edge that reached it.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "statevc/commit.hpp"

namespace statevc {

class CommitStore;

enum class EdgeKind { CodeParent, DataParent, BothParents };

std::string_view to_string(EdgeKind kind);

struct GraphEdge {
    CommitId to;
    EdgeKind kind;

    bool operator==(const GraphEdge&) const = default;
};

enum class LabelKind { HeadCode, HeadData, Branch, Tag };

std::string_view to_string(LabelKind kind);

struct Label {
    LabelKind kind;
    std::string text;  // empty for head labels

    auto operator<=>(const Label&) const = default;
};

struct GraphRow {
    CommitId commit;
    std::size_t row = 0;
    std::size_t lane = 0;
    std::vector<GraphEdge> edges;
    std::vector<Label> labels;

    bool operator==(const GraphRow&) const = default;
};

/// Order in which ready commits are emitted.
enum class RowOrder {
    /// Follow each chain down to its parent as soon as the parent is ready;
    /// among unrelated ready commits prefer longer history, then smaller id.
    DepthFirst,
    /// Always emit the ready commit with the longest history, then smallest
    /// id. Can need more than B+1 lanes when a commit has three or more
    /// children; kept for comparison.
    HistoryLength,
};

struct GraphLayout {
    std::vector<GraphRow> rows;
    /// Columns needed, counting lanes held by edges that pass through.
    std::size_t lanes = 0;
};

GraphLayout linearize(const CommitStore& store, const std::optional<Head>& head, const BranchMap& branches,
                      RowOrder order = RowOrder::DepthFirst);

/// Commits with more than one distinct child.
std::size_t branch_point_count(const CommitStore& store);

struct Importance {
    bool user = false;      // tagged or messaged
    bool topology = false;  // root, leaf, branch point or merge

    bool important() const { return user || topology; }
};

std::unordered_map<CommitId, Importance> importance(const CommitStore& store);

struct GroupedCommit {
    std::string group_id;
    std::vector<GraphRow> rows;  // members in row order
    bool collapsed = true;

    std::vector<CommitId> members() const;
    bool operator==(const GroupedCommit&) const = default;
};

using GraphItem = std::variant<GraphRow, GroupedCommit>;

class FoldedGraph {
public:
    explicit FoldedGraph(std::vector<GraphItem> items) : items_(std::move(items)) {}

    const std::vector<GraphItem>& items() const noexcept { return items_; }

    /// Member rows of a group. Throws Error(UnknownGroup).
    std::vector<GraphRow> expand(std::string_view group_id) const;
    void set_collapsed(std::string_view group_id, bool collapsed);

    /// Every row, groups flattened in place.
    std::vector<GraphRow> expand_all() const;

    /// Number of commits visible: single rows plus members of open groups.
    std::size_t visible_rows() const;

private:
    GroupedCommit& group(std::string_view group_id);
    std::vector<GraphItem> items_;
};

/// Folds each maximal run of unimportant commits, where every row's single
/// parent is the next row, into one group.
FoldedGraph fold(const std::vector<GraphRow>& rows, const std::unordered_map<CommitId, Importance>& importance);

std::string group_id_for(const std::vector<CommitId>& members);

}  // namespace statevc
