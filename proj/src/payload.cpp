#include "statevc/payload.hpp"

#include <algorithm>

#include "statevc/search.hpp"

namespace statevc::payload {

namespace {

Json opt_id(const std::optional<CommitId>& id) { return id ? Json(id->str()) : Json(nullptr); }
Json opt_str(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

Json names(const std::set<std::string>& s) {
    Json arr = Json::array();
    for (const auto& n : s) arr.push_back(n);
    return arr;
}

Json line_ops(const std::vector<LineOp>& ops) {
    Json arr = Json::array();
    for (const auto& op : ops) arr.push_back({{"op", to_string(op.kind)}, {"text", op.text}});
    return arr;
}

}  // namespace

Json to_json(const GraphRow& r) {
    Json edges = Json::array();
    for (const auto& e : r.edges) edges.push_back({{"to", e.to.str()}, {"kind", to_string(e.kind)}});
    Json labels = Json::array();
    for (const auto& l : r.labels) labels.push_back({{"kind", to_string(l.kind)}, {"text", l.text}});
    return {{"commit", r.commit.str()}, {"row", r.row}, {"lane", r.lane}, {"edges", std::move(edges)}, {"labels", std::move(labels)}};
}

Json graph(const CommitStore& store, const std::optional<Head>& head, bool fold) {
    const auto layout = linearize(store, head, store.branches());
    Json rows = Json::array();
    for (const auto& r : layout.rows) {
        Json row = to_json(r);
        auto c = store.get(r.commit);
        row["message"] = opt_str(c->message);
        row["tag"] = opt_str(c->tag);
        row["branch"] = c->branch;
        row["kind"] = to_string(c->kind);
        row["history_len"] = c->history_len;
        rows.push_back(std::move(row));
    }
    Json items = Json::array();
    if (fold) {
        const FoldedGraph folded = statevc::fold(layout.rows, importance(store));
        for (const auto& item : folded.items()) {
            if (const auto* r = std::get_if<GraphRow>(&item)) {
                items.push_back({{"type", "commit"}, {"commit", r->commit.str()}});
            } else {
                const auto& g = std::get<GroupedCommit>(item);
                Json members = Json::array();
                for (const auto& id : g.members()) members.push_back(id.str());
                items.push_back({{"type", "group"}, {"group_id", g.group_id}, {"collapsed", g.collapsed}, {"members", std::move(members)}});
            }
        }
    } else {
        for (const auto& r : layout.rows) items.push_back({{"type", "commit"}, {"commit", r.commit.str()}});
    }
    return {{"fold", fold}, {"lanes", layout.lanes}, {"rows", std::move(rows)}, {"items", std::move(items)}};
}

Json commit(const CommitStore& store, const CommitId& id) {
    auto c = store.get(id);
    Json history = Json::array();
    for (const auto& rec : store.executions_at(id)) {
        Json h = codec::to_json(rec.entry);
        h["output"] = rec.output;
        h["error"] = rec.error;
        history.push_back(std::move(h));
    }
    auto changed = store.changed_variables(id);
    return {
        {"id", c->id.str()},
        {"code_parent", opt_id(c->code_parent)},
        {"data_parent", opt_id(c->data_parent)},
        {"branch", c->branch},
        {"kind", to_string(c->kind)},
        {"message", opt_str(c->message)},
        {"tag", opt_str(c->tag)},
        {"created_at", c->created_at},
        {"history_len", c->history_len},
        {"cells", codec::to_json(c->code)},
        {"history", std::move(history)},
        {"changed", names(changed.changed)},
        {"deleted", names(changed.deleted)},
    };
}

std::string truncate_utf8(const std::string& text, std::size_t cap, bool* truncated) {
    if (text.size() <= cap) {
        if (truncated) *truncated = false;
        return text;
    }
    std::size_t cut = cap;
    while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
    if (truncated) *truncated = true;
    return text.substr(0, cut);
}

Json variables(const Environment& env, const VariablePage& request) {
    std::vector<std::pair<std::string, const Value*>> all;
    for (const auto& [name, value] : env) all.emplace_back(name, &value);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    if (!request.filter.empty()) {
        std::stable_partition(all.begin(), all.end(),
                              [&](const auto& v) { return contains_ignore_case(v.first, request.filter); });
    }
    const std::size_t size = std::max<std::size_t>(request.page_size, 1);
    Json vars = Json::array();
    for (std::size_t i = request.page * size; i < all.size() && i < (request.page + 1) * size; ++i) {
        const auto& [name, value] = all[i];
        bool truncated = false;
        std::string text = truncate_utf8(repr(*value), request.repr_cap, &truncated);
        vars.push_back({{"name", name},
                        {"type", type_name(*value)},
                        {"repr", std::move(text)},
                        {"truncated", truncated},
                        {"pinned", !request.filter.empty() && contains_ignore_case(name, request.filter)}});
    }
    return {{"total", all.size()}, {"page", request.page}, {"page_size", size}, {"variables", std::move(vars)}};
}

Json to_json(const CodeDiff& d) {
    Json ops = Json::array();
    for (const auto& op : d.ops) {
        Json j{{"op", to_string(op.kind)}, {"cell", codec::to_json(op.cell)}};
        if (op.kind == CellOpKind::Modified) j["lines"] = line_ops(op.line_ops);
        ops.push_back(std::move(j));
    }
    return ops;
}

Json to_json(const VariableDiff& d) {
    return {{"changed", names(d.changed)},
            {"added", names(d.added_right)},
            {"deleted", names(d.deleted_right)},
            {"unchanged", names(d.unchanged)}};
}

Json diff(const CommitStore& store, const CommitId& a, const CommitId& b) {
    return {{"a", a.str()},
            {"b", b.str()},
            {"code", to_json(diff_code(store, a, b))},
            {"variables", to_json(diff_variables(store, a, b))}};
}

Json search(const std::vector<CommitId>& ids) {
    Json arr = Json::array();
    for (const auto& id : ids) arr.push_back(id.str());
    return {{"commits", std::move(arr)}};
}

Json head(const Session& s) {
    return {{"head_code", s.head().code.str()},
            {"head_data", s.head().data.str()},
            {"split", s.head().split()},
            {"branch", s.branch()},
            {"next_counter", s.next_counter()},
            {"dirty", s.dirty()}};
}

Json notebook(const Session& s) {
    return {{"cells", codec::to_json(s.notebook())}, {"head", head(s)}};
}

Json error(const Error& e) {
    Json body{{"code", to_string(e.code())}, {"message", e.what()}};
    switch (e.code()) {
        case ErrorCode::UnsafeOnlyCode: body["checkout_class"] = to_string(CheckoutClass::UnsafeOnlyCode); break;
        case ErrorCode::UnsafeFutureData: body["checkout_class"] = to_string(CheckoutClass::UnsafeFutureData); break;
        case ErrorCode::UnsafeUnrelatedData: body["checkout_class"] = to_string(CheckoutClass::UnsafeUnrelatedData); break;
        default: break;
    }
    return {{"error", std::move(body)}};
}

std::string notebook_text(const CodeState& code) {
    return Json{{"cells", codec::to_json(code)}}.dump(2) + "\n";
}

CodeState notebook_from_text(std::string_view text) {
    try {
        Json j = Json::parse(text);
        if (!j.is_object() || !j.contains("cells") || !j["cells"].is_array()) {
            throw Error(ErrorCode::BadRequest, "notebook must be an object with a \"cells\" array");
        }
        return codec::code_from_json(j["cells"]);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::BadRequest, std::string("malformed notebook: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageIO) throw Error(ErrorCode::BadRequest, e.what());
        throw;
    }
}

}  // namespace statevc::payload
