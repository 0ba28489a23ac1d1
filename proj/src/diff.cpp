#include "statevc/diff.hpp"

#include <algorithm>
#include <unordered_map>

#include "statevc/commit_store.hpp"
#include "statevc/error.hpp"

namespace statevc {

std::string_view to_string(EditKind kind) {
    switch (kind) {
        case EditKind::Keep: return "keep";
        case EditKind::Insert: return "insert";
        case EditKind::Delete: return "delete";
    }
    return "keep";
}

std::string_view to_string(CellOpKind kind) {
    switch (kind) {
        case CellOpKind::Kept: return "kept";
        case CellOpKind::Added: return "added";
        case CellOpKind::Deleted: return "deleted";
        case CellOpKind::Modified: return "modified";
    }
    return "kept";
}

namespace {

// Myers' greedy forward search over [lo_a, hi_a) x [lo_b, hi_b), keeping
// one V slice per d for the backtrack.
void myers_core(std::size_t lo_a, std::size_t hi_a, std::size_t lo_b, std::size_t hi_b,
                const std::function<bool(std::size_t, std::size_t)>& equal, std::vector<EditStep>& out) {
    const long n = static_cast<long>(hi_a - lo_a);
    const long m = static_cast<long>(hi_b - lo_b);
    if (n == 0 && m == 0) return;

    std::vector<std::vector<long>> trace;
    std::vector<long> v(3, 0);  // v[k + d + 1] for k in [-d-1, d+1]
    long final_d = -1;

    for (long d = 0; d <= n + m; ++d) {
        std::vector<long> next(static_cast<std::size_t>(2 * d + 3), 0);
        auto prev_at = [&](long k) { return v[static_cast<std::size_t>(k + d)]; };  // v was sized for d-1
        for (long k = -d; k <= d; k += 2) {
            long x;
            if (d == 0) {
                x = 0;
            } else if (k == -d || (k != d && prev_at(k - 1) < prev_at(k + 1))) {
                x = prev_at(k + 1);
            } else {
                x = prev_at(k - 1) + 1;
            }
            long y = x - k;
            while (x < n && y < m && equal(lo_a + static_cast<std::size_t>(x), lo_b + static_cast<std::size_t>(y))) {
                ++x;
                ++y;
            }
            next[static_cast<std::size_t>(k + d + 1)] = x;
            if (x >= n && y >= m) {
                final_d = d;
                break;
            }
        }
        trace.push_back(next);
        v = std::move(next);
        if (final_d >= 0) break;
    }

    std::vector<EditStep> steps;
    long x = n, y = m;
    for (long d = final_d; d > 0; --d) {
        const auto& prev = trace[static_cast<std::size_t>(d - 1)];
        auto prev_at = [&](long k) { return prev[static_cast<std::size_t>(k + d)]; };
        const long k = x - y;
        const long prev_k = (k == -d || (k != d && prev_at(k - 1) < prev_at(k + 1))) ? k + 1 : k - 1;
        const long prev_x = prev_at(prev_k);
        const long prev_y = prev_x - prev_k;
        while (x > prev_x && y > prev_y) {
            --x;
            --y;
            steps.push_back({EditKind::Keep, lo_a + static_cast<std::size_t>(x), lo_b + static_cast<std::size_t>(y)});
        }
        if (x == prev_x) {
            steps.push_back({EditKind::Insert, lo_a + static_cast<std::size_t>(x), lo_b + static_cast<std::size_t>(prev_y)});
        } else {
            steps.push_back({EditKind::Delete, lo_a + static_cast<std::size_t>(prev_x), lo_b + static_cast<std::size_t>(y)});
        }
        x = prev_x;
        y = prev_y;
    }
    while (x > 0 && y > 0) {
        --x;
        --y;
        steps.push_back({EditKind::Keep, lo_a + static_cast<std::size_t>(x), lo_b + static_cast<std::size_t>(y)});
    }
    out.insert(out.end(), steps.rbegin(), steps.rend());
}

}  // namespace

std::vector<EditStep> shortest_edit_script(std::size_t n, std::size_t m,
                                           const std::function<bool(std::size_t, std::size_t)>& equal) {
    std::size_t prefix = 0;
    while (prefix < n && prefix < m && equal(prefix, prefix)) ++prefix;
    std::size_t suffix = 0;
    while (suffix < n - prefix && suffix < m - prefix && equal(n - 1 - suffix, m - 1 - suffix)) ++suffix;

    std::vector<EditStep> out;
    for (std::size_t i = 0; i < prefix; ++i) out.push_back({EditKind::Keep, i, i});
    myers_core(prefix, n - suffix, prefix, m - suffix, equal, out);
    for (std::size_t i = suffix; i > 0; --i) out.push_back({EditKind::Keep, n - i, m - i});

    // Deletions first within each change run.
    for (auto it = out.begin(); it != out.end();) {
        if (it->kind == EditKind::Keep) {
            ++it;
            continue;
        }
        auto run_end = std::find_if(it, out.end(), [](const EditStep& s) { return s.kind == EditKind::Keep; });
        std::stable_partition(it, run_end, [](const EditStep& s) { return s.kind == EditKind::Delete; });
        it = run_end;
    }
    // Normalize the cursor on the opposite sequence for the reordered run.
    std::size_t a = 0, b = 0;
    for (auto& s : out) {
        s.left = a;
        s.right = b;
        if (s.kind != EditKind::Insert) ++a;
        if (s.kind != EditKind::Delete) ++b;
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    for (;;) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(start));
            return lines;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
}

std::string join_lines(std::span<const std::string> lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::vector<LineOp> diff_lines(std::span<const std::string> left, std::span<const std::string> right) {
    auto script = shortest_edit_script(left.size(), right.size(),
                                       [&](std::size_t i, std::size_t j) { return left[i] == right[j]; });
    std::vector<LineOp> ops;
    ops.reserve(script.size());
    for (const auto& s : script) {
        ops.push_back({s.kind, s.kind == EditKind::Insert ? right[s.right] : left[s.left]});
    }
    return ops;
}

std::vector<LineOp> diff_text(std::string_view left, std::string_view right) {
    return diff_lines(split_lines(left), split_lines(right));
}

std::string apply_lines(std::string_view left, std::span<const LineOp> ops) {
    const auto lines = split_lines(left);
    std::vector<std::string> out;
    std::size_t i = 0;
    for (const auto& op : ops) {
        if (op.kind == EditKind::Insert) {
            out.push_back(op.text);
            continue;
        }
        if (i >= lines.size() || lines[i] != op.text) throw Error(ErrorCode::BadRequest, "line script does not match its base text");
        if (op.kind == EditKind::Keep) out.push_back(lines[i]);
        ++i;
    }
    if (i != lines.size()) throw Error(ErrorCode::BadRequest, "line script does not cover its base text");
    return join_lines(out);
}

CodeDiff diff_code(const CodeState& left, const CodeState& right) {
    const auto& a = left.cells;
    const auto& b = right.cells;
    auto script = shortest_edit_script(a.size(), b.size(), [&](std::size_t i, std::size_t j) { return a[i].id == b[j].id; });

    CodeDiff diff;
    for (const auto& s : script) {
        switch (s.kind) {
            case EditKind::Delete: diff.ops.push_back({CellOpKind::Deleted, a[s.left], {}}); break;
            case EditKind::Insert: diff.ops.push_back({CellOpKind::Added, b[s.right], {}}); break;
            case EditKind::Keep: {
                const Cell& l = a[s.left];
                const Cell& r = b[s.right];
                if (l == r) {
                    diff.ops.push_back({CellOpKind::Kept, r, {}});
                } else {
                    diff.ops.push_back({CellOpKind::Modified, r, diff_text(l.source, r.source)});
                }
                break;
            }
        }
    }
    return diff;
}

CodeState apply(const CodeDiff& diff, const CodeState& left) {
    CodeState out;
    std::size_t i = 0;
    auto take_left = [&](const CellOp& op) -> const Cell& {
        if (i >= left.cells.size() || left.cells[i].id != op.cell.id) {
            throw Error(ErrorCode::BadRequest, "code diff does not match its base state at cell '" + op.cell.id + "'");
        }
        return left.cells[i++];
    };
    for (const auto& op : diff.ops) {
        switch (op.kind) {
            case CellOpKind::Added: out.cells.push_back(op.cell); break;
            case CellOpKind::Deleted: take_left(op); break;
            case CellOpKind::Kept: out.cells.push_back(take_left(op)); break;
            case CellOpKind::Modified: {
                Cell cell = take_left(op);
                cell.source = apply_lines(cell.source, op.line_ops);
                cell.kind = op.cell.kind;
                cell.output = op.cell.output;
                cell.error = op.cell.error;
                cell.exec_counter = op.cell.exec_counter;
                out.cells.push_back(std::move(cell));
                break;
            }
        }
    }
    if (i != left.cells.size()) throw Error(ErrorCode::BadRequest, "code diff does not cover its base state");
    return out;
}

VariableDiff diff_tables(const VariableVersionTable& left, const VariableVersionTable& right) {
    VariableDiff d;
    for (const auto& [name, version] : left) {
        auto it = right.find(name);
        if (it == right.end()) {
            d.deleted_right.insert(name);
        } else if (it->second == version) {
            d.unchanged.insert(name);
        } else {
            d.changed.insert(name);
        }
    }
    for (const auto& [name, version] : right) {
        if (!left.contains(name)) d.added_right.insert(name);
    }
    return d;
}

VariableDiff diff_variables(const CommitStore& store, const CommitId& a, const CommitId& b) {
    return diff_tables(*store.version_table(a), *store.version_table(b));
}

CodeDiff diff_code(const CommitStore& store, const CommitId& a, const CommitId& b) {
    return diff_code(store.get(a)->code, store.get(b)->code);
}

}  // namespace statevc
