#include "statevc/history_graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "statevc/codec.hpp"
#include "statevc/commit_store.hpp"
#include "statevc/error.hpp"

namespace statevc {

std::string_view to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::CodeParent: return "code_parent";
        case EdgeKind::DataParent: return "data_parent";
        case EdgeKind::BothParents: return "both_parents";
    }
    return "both_parents";
}

std::string_view to_string(LabelKind kind) {
    switch (kind) {
        case LabelKind::HeadCode: return "head_code";
        case LabelKind::HeadData: return "head_data";
        case LabelKind::Branch: return "branch";
        case LabelKind::Tag: return "tag";
    }
    return "tag";
}

namespace {

std::vector<GraphEdge> edges_of(const Commit& c) {
    std::vector<GraphEdge> edges;
    if (c.code_parent && c.data_parent && *c.code_parent == *c.data_parent) {
        edges.push_back({*c.code_parent, EdgeKind::BothParents});
        return edges;
    }
    if (c.code_parent) edges.push_back({*c.code_parent, EdgeKind::CodeParent});
    if (c.data_parent) edges.push_back({*c.data_parent, EdgeKind::DataParent});
    return edges;
}

struct Snapshot {
    std::vector<std::shared_ptr<const Commit>> commits;
    std::unordered_map<CommitId, std::size_t> index;
    std::vector<std::set<std::size_t>> children;
    std::vector<std::vector<std::size_t>> parents;  // distinct, edge order
};

Snapshot snapshot(const CommitStore& store) {
    Snapshot s;
    for (const auto& id : store.commit_ids()) {
        s.index.emplace(id, s.commits.size());
        s.commits.push_back(store.get(id));
    }
    s.children.resize(s.commits.size());
    s.parents.resize(s.commits.size());
    for (std::size_t i = 0; i < s.commits.size(); ++i) {
        for (const auto& e : edges_of(*s.commits[i])) {
            std::size_t p = s.index.at(e.to);
            s.parents[i].push_back(p);
            s.children[p].insert(i);
        }
    }
    return s;
}

}  // namespace

std::size_t branch_point_count(const CommitStore& store) {
    auto s = snapshot(store);
    return static_cast<std::size_t>(
        std::count_if(s.children.begin(), s.children.end(), [](const auto& c) { return c.size() > 1; }));
}

GraphLayout linearize(const CommitStore& store, const std::optional<Head>& head, const BranchMap& branches,
                      RowOrder order) {
    const Snapshot s = snapshot(store);
    const std::size_t n = s.commits.size();

    // Higher priority first: longer history, then smaller id.
    auto before = [&](std::size_t a, std::size_t b) {
        const auto& ca = *s.commits[a];
        const auto& cb = *s.commits[b];
        if (ca.history_len != cb.history_len) return ca.history_len > cb.history_len;
        return ca.id < cb.id;
    };

    std::vector<std::size_t> pending(n);
    for (std::size_t i = 0; i < n; ++i) pending[i] = s.children[i].size();

    std::vector<std::size_t> sequence;
    sequence.reserve(n);
    if (order == RowOrder::DepthFirst) {
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < n; ++i) {
            if (pending[i] == 0) stack.push_back(i);
        }
        std::sort(stack.begin(), stack.end(), [&](auto a, auto b) { return before(b, a); });
        while (!stack.empty()) {
            std::size_t c = stack.back();
            stack.pop_back();
            sequence.push_back(c);
            const auto& ps = s.parents[c];
            for (auto it = ps.rbegin(); it != ps.rend(); ++it) {
                if (--pending[*it] == 0) stack.push_back(*it);
            }
        }
    } else {
        auto worse = [&](std::size_t a, std::size_t b) { return before(b, a); };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(worse)> ready(worse);
        for (std::size_t i = 0; i < n; ++i) {
            if (pending[i] == 0) ready.push(i);
        }
        while (!ready.empty()) {
            std::size_t c = ready.top();
            ready.pop();
            sequence.push_back(c);
            for (std::size_t p : s.parents[c]) {
                if (--pending[p] == 0) ready.push(p);
            }
        }
    }

    std::unordered_map<CommitId, std::vector<Label>> labels;
    if (head) {
        labels[head->code].push_back({LabelKind::HeadCode, {}});
        labels[head->data].push_back({LabelKind::HeadData, {}});
    }
    for (const auto& [name, id] : branches) {
        if (s.index.contains(id)) labels[id].push_back({LabelKind::Branch, name});
    }

    GraphLayout layout;
    std::vector<std::optional<std::size_t>> expecting;  // lane -> commit index it waits for
    auto free_lane = [&]() {
        for (std::size_t l = 0; l < expecting.size(); ++l) {
            if (!expecting[l]) return l;
        }
        expecting.emplace_back();
        return expecting.size() - 1;
    };
    auto expected_elsewhere = [&](std::size_t commit) {
        return std::any_of(expecting.begin(), expecting.end(), [&](const auto& e) { return e == commit; });
    };

    for (std::size_t row = 0; row < sequence.size(); ++row) {
        const std::size_t c = sequence[row];
        std::optional<std::size_t> lane;
        for (std::size_t l = 0; l < expecting.size(); ++l) {
            if (expecting[l] == c) {
                if (!lane) lane = l;
                expecting[l].reset();
            }
        }
        if (!lane) lane = free_lane();

        const auto& ps = s.parents[c];
        if (!ps.empty() && !expected_elsewhere(ps[0])) expecting[*lane] = ps[0];
        for (std::size_t k = 1; k < ps.size(); ++k) {
            if (!expected_elsewhere(ps[k])) {
                std::size_t l = free_lane();
                expecting[l] = ps[k];
            }
        }
        layout.lanes = std::max(layout.lanes, expecting.size());

        const Commit& commit = *s.commits[c];
        GraphRow r{commit.id, row, *lane, edges_of(commit), {}};
        if (auto it = labels.find(commit.id); it != labels.end()) r.labels = it->second;
        if (commit.tag) r.labels.push_back({LabelKind::Tag, *commit.tag});
        std::sort(r.labels.begin(), r.labels.end());
        layout.rows.push_back(std::move(r));
    }
    return layout;
}

std::unordered_map<CommitId, Importance> importance(const CommitStore& store) {
    const Snapshot s = snapshot(store);
    std::unordered_map<CommitId, Importance> out;
    for (std::size_t i = 0; i < s.commits.size(); ++i) {
        const Commit& c = *s.commits[i];
        Importance imp;
        imp.user = c.tag.has_value() || c.message.has_value();
        imp.topology = s.parents[i].size() != 1 || s.children[i].size() != 1;
        out.emplace(c.id, imp);
    }
    return out;
}

std::vector<CommitId> GroupedCommit::members() const {
    std::vector<CommitId> ids;
    ids.reserve(rows.size());
    for (const auto& r : rows) ids.push_back(r.commit);
    return ids;
}

std::string group_id_for(const std::vector<CommitId>& members) {
    std::string joined;
    for (const auto& id : members) joined += id.str() + "\n";
    return "g" + codec::sha256_hex(joined).substr(0, 16);
}

FoldedGraph fold(const std::vector<GraphRow>& rows, const std::unordered_map<CommitId, Importance>& importance) {
    auto foldable = [&](const GraphRow& r) {
        auto it = importance.find(r.commit);
        return it != importance.end() && !it->second.important();
    };
    std::vector<GraphItem> items;
    std::size_t i = 0;
    while (i < rows.size()) {
        if (!foldable(rows[i])) {
            items.emplace_back(rows[i++]);
            continue;
        }
        GroupedCommit group;
        group.rows.push_back(rows[i++]);
        while (i < rows.size() && foldable(rows[i]) && group.rows.back().edges.size() == 1 &&
               group.rows.back().edges[0].to == rows[i].commit) {
            group.rows.push_back(rows[i++]);
        }
        group.group_id = group_id_for(group.members());
        items.emplace_back(std::move(group));
    }
    return FoldedGraph(std::move(items));
}

GroupedCommit& FoldedGraph::group(std::string_view group_id) {
    for (auto& item : items_) {
        if (auto* g = std::get_if<GroupedCommit>(&item); g && g->group_id == group_id) return *g;
    }
    throw Error(ErrorCode::UnknownGroup, "unknown group " + std::string(group_id));
}

std::vector<GraphRow> FoldedGraph::expand(std::string_view group_id) const {
    for (const auto& item : items_) {
        if (const auto* g = std::get_if<GroupedCommit>(&item); g && g->group_id == group_id) return g->rows;
    }
    throw Error(ErrorCode::UnknownGroup, "unknown group " + std::string(group_id));
}

void FoldedGraph::set_collapsed(std::string_view group_id, bool collapsed) { group(group_id).collapsed = collapsed; }

std::vector<GraphRow> FoldedGraph::expand_all() const {
    std::vector<GraphRow> rows;
    for (const auto& item : items_) {
        if (const auto* r = std::get_if<GraphRow>(&item)) {
            rows.push_back(*r);
        } else {
            const auto& g = std::get<GroupedCommit>(item);
            rows.insert(rows.end(), g.rows.begin(), g.rows.end());
        }
    }
    return rows;
}

std::size_t FoldedGraph::visible_rows() const {
    std::size_t n = 0;
    for (const auto& item : items_) {
        if (std::holds_alternative<GraphRow>(item)) {
            ++n;
        } else if (const auto& g = std::get<GroupedCommit>(item); !g.collapsed) {
            n += g.rows.size();
        }
    }
    return n;
}

}  // namespace statevc
