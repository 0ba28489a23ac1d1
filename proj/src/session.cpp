#include "statevc/session.hpp"

#include <algorithm>
#include <charconv>

#include "statevc/error.hpp"
#include "statevc/kernel.hpp"

namespace statevc {

namespace {

constexpr const char* kMainBranch = "main";

void require_utf8(std::string_view text, std::string_view what) {
    if (!is_valid_utf8(text)) throw Error(ErrorCode::BadRequest, std::string(what) + " is not valid UTF-8");
}

std::optional<std::uint64_t> cell_number(std::string_view id) {
    if (id.size() < 2 || id[0] != 'c') return std::nullopt;
    std::uint64_t n = 0;
    auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), n);
    if (ec != std::errc() || ptr != id.data() + id.size()) return std::nullopt;
    return n;
}

std::optional<std::string> non_empty(std::optional<std::string> s) {
    if (s && s->empty()) return std::nullopt;
    return s;
}

}  // namespace

ErrorCode rejection_code(CheckoutClass c) {
    switch (c) {
        case CheckoutClass::UnsafeOnlyCode: return ErrorCode::UnsafeOnlyCode;
        case CheckoutClass::UnsafeFutureData: return ErrorCode::UnsafeFutureData;
        case CheckoutClass::UnsafeUnrelatedData: return ErrorCode::UnsafeUnrelatedData;
        case CheckoutClass::SafeBoth:
        case CheckoutClass::SafePastData: break;
    }
    return ErrorCode::BadRequest;
}

Session Session::open(CommitStore& store) {
    if (!store.empty()) return recover_latest(store);
    Session s(store);
    Commit root;
    root.branch = kMainBranch;
    root.kind = CommitKind::Manual;
    s.advance(store.persist_commit(std::move(root)), kMainBranch);
    return s;
}

Session Session::recover_latest(CommitStore& store) {
    if (store.empty()) throw Error(ErrorCode::EmptyStore, "store " + store.dir().string() + " has no commits");
    Session s(store);
    auto head = store.read_head();
    if (!head) {
        const CommitId last = store.commit_ids().back();
        head = Head{last, last};
    }
    s.head_ = *head;
    s.notebook_ = store.get(head->code)->code;
    s.load_data(head->data);
    if (head->split()) s.sync_cells();

    for (const auto& [name, tip] : store.branches()) {
        if (tip == head->code) s.branch_ = name;
    }
    for (const auto& id : store.commit_ids()) {
        for (const auto& cell : store.get(id)->code.cells) {
            if (auto n = cell_number(cell.id)) s.next_cell_ = std::max(s.next_cell_, *n + 1);
        }
    }
    return s;
}

void Session::load_data(const CommitId& data) {
    env_ = store_->materialize_variables(data);
    history_ = store_->history_at(data);
    executions_ = store_->executions_at(data);
}

void Session::sync_cell(Cell& cell) const {
    if (cell.kind != CellKind::Code) {
        cell.output.clear();
        cell.error = false;
        cell.exec_counter.reset();
        return;
    }
    if (auto n = is_executed(cell, history_)) {
        const auto& rec = executions_.at(static_cast<std::size_t>(*n - 1));
        cell.exec_counter = *n;
        cell.output = rec.output;
        cell.error = rec.error;
    } else {
        cell.exec_counter.reset();
    }
}

void Session::sync_cells() {
    for (auto& cell : notebook_.cells) sync_cell(cell);
}

CellId Session::fresh_cell_id() {
    for (;;) {
        CellId id = "c" + std::to_string(next_cell_++);
        if (!notebook_.find(id)) return id;
    }
}

Cell& Session::cell_or_throw(const CellId& id) {
    Cell* cell = notebook_.find(id);
    if (!cell) throw Error(ErrorCode::UnknownCell, "unknown cell '" + id + "'");
    return *cell;
}

CellId Session::add_cell(CellKind kind, std::string source, std::optional<std::size_t> position) {
    require_utf8(source, "cell source");
    const std::size_t at = position.value_or(notebook_.cells.size());
    if (at > notebook_.cells.size()) throw Error(ErrorCode::BadRequest, "cell position out of range");
    Cell cell;
    cell.id = fresh_cell_id();
    cell.kind = kind;
    cell.source = std::move(source);
    sync_cell(cell);
    notebook_.cells.insert(notebook_.cells.begin() + static_cast<std::ptrdiff_t>(at), cell);
    dirty_ = true;
    return cell.id;
}

void Session::edit_cell(const CellId& id, std::string source) {
    require_utf8(source, "cell source");
    Cell& cell = cell_or_throw(id);
    if (cell.source == source) return;
    cell.source = std::move(source);
    sync_cell(cell);
    dirty_ = true;
}

void Session::delete_cell(const CellId& id) {
    cell_or_throw(id);
    auto pos = *notebook_.position(id);
    notebook_.cells.erase(notebook_.cells.begin() + static_cast<std::ptrdiff_t>(pos));
    dirty_ = true;
}

void Session::move_cell(const CellId& id, std::size_t position) {
    cell_or_throw(id);
    if (position >= notebook_.cells.size()) throw Error(ErrorCode::BadRequest, "cell position out of range");
    auto from = *notebook_.position(id);
    if (from == position) return;
    Cell cell = std::move(notebook_.cells[from]);
    notebook_.cells.erase(notebook_.cells.begin() + static_cast<std::ptrdiff_t>(from));
    notebook_.cells.insert(notebook_.cells.begin() + static_cast<std::ptrdiff_t>(position), std::move(cell));
    dirty_ = true;
}

void Session::replace_notebook(CodeState code) {
    std::set<std::string_view> ids;
    for (const auto& cell : code.cells) {
        if (cell.id.empty() || !ids.insert(cell.id).second) {
            throw Error(ErrorCode::BadRequest, "cell ids must be non-empty and unique");
        }
        require_utf8(cell.id, "cell id");
        require_utf8(cell.source, "cell source");
        require_utf8(cell.output, "cell output");
    }
    notebook_ = std::move(code);
    sync_cells();
    for (const auto& cell : notebook_.cells) {
        if (auto n = cell_number(cell.id)) next_cell_ = std::max(next_cell_, *n + 1);
    }
    dirty_ = true;
}

std::string Session::next_branch() const {
    const BranchMap tips = store_->branches();
    if (auto it = tips.find(branch_); it != tips.end() && it->second == head_.code) return branch_;
    for (const auto& [name, tip] : tips) {
        if (tip == head_.code) return name;
    }
    for (std::size_t k = 1;; ++k) {
        std::string name = "b" + std::to_string(k);
        if (!tips.contains(name)) return name;
    }
}

void Session::advance(const CommitId& id, const std::string& branch) {
    store_->set_branch(branch, id);
    store_->write_head({id, id});
    head_ = {id, id};
    branch_ = branch;
    dirty_ = false;
}

CommitId Session::execute_cell(const CellId& id) {
    const Cell& current = cell_or_throw(id);
    if (current.kind != CellKind::Code) throw Error(ErrorCode::NotCodeCell, "cell '" + id + "' is not a code cell");

    auto result = kernel::exec_one(env_, current.source);
    const std::int64_t counter = next_counter();

    Commit c;
    for (const auto& [name, value] : result.env) {
        const Value* before = env_.find(name);
        if (!before || !(*before == value)) c.var_delta.emplace(name, value);
    }
    for (const auto& [name, value] : env_) {
        if (!result.env.contains(name)) c.var_deleted.insert(name);
    }

    CodeState code = notebook_;
    Cell& cell = *code.find(id);
    cell.output = result.output;
    cell.error = result.error;
    cell.exec_counter = counter;
    HistoryEntry entry{id, cell.source, counter};

    c.code_parent = head_.code;
    c.data_parent = head_.data;
    c.code = code;
    c.history_len = counter;
    c.history_tail = entry;
    c.branch = next_branch();
    c.kind = CommitKind::Auto;
    const std::string branch = c.branch;
    const CommitId cid = store_->persist_commit(std::move(c));

    notebook_ = std::move(code);
    env_ = std::move(result.env);
    history_.push_back(entry);
    executions_.push_back({entry, result.output, result.error});
    advance(cid, branch);
    return cid;
}

CommitId Session::commit_manual(std::optional<std::string> message, std::optional<std::string> tag) {
    message = non_empty(std::move(message));
    tag = non_empty(std::move(tag));
    if (message) require_utf8(*message, "message");
    if (tag) require_utf8(*tag, "tag");

    Commit c;
    c.code_parent = head_.code;
    c.data_parent = head_.data;
    c.code = notebook_;
    c.history_len = static_cast<std::int64_t>(history_.size());
    c.message = std::move(message);
    c.tag = std::move(tag);
    c.branch = next_branch();
    c.kind = CommitKind::Manual;
    const std::string branch = c.branch;
    const CommitId cid = store_->persist_commit(std::move(c));
    advance(cid, branch);
    return cid;
}

CheckoutClass Session::classify(const CommitId& target, CheckoutMode mode) const {
    return classify_checkout(history_, store_->history_at(target), mode);
}

void Session::checkout_both(const CommitId& target) {
    auto commit = store_->get(target);
    Environment env = store_->materialize_variables(target);
    auto history = store_->history_at(target);
    auto executions = store_->executions_at(target);

    notebook_ = commit->code;
    env_ = std::move(env);
    history_ = std::move(history);
    executions_ = std::move(executions);
    head_ = {target, target};
    dirty_ = false;
    branch_.clear();
    for (const auto& [name, tip] : store_->branches()) {
        if (tip == target) branch_ = name;
    }
    store_->write_head(head_);
}

void Session::rollback_data(const CommitId& target) {
    const CheckoutClass cls = classify(target, CheckoutMode::DataOnly);
    if (cls != CheckoutClass::SafePastData) {
        throw Error(rejection_code(cls), std::string(to_string(cls)) + ": commit " + target.short_str() +
                                             " is not a past state of the current data");
    }
    if (target == head_.data) return;

    CodeState base = dirty_ ? notebook_ : store_->get(head_.code)->code;
    Environment env = store_->materialize_variables(target);
    auto history = store_->history_at(target);
    auto executions = store_->executions_at(target);
    store_->write_head({head_.code, target});

    env_ = std::move(env);
    history_ = std::move(history);
    executions_ = std::move(executions);
    notebook_ = std::move(base);
    sync_cells();
    head_.data = target;
}

void Session::checkout(const CommitId& target, CheckoutMode mode) {
    switch (mode) {
        case CheckoutMode::Both: checkout_both(target); return;
        case CheckoutMode::DataOnly: rollback_data(target); return;
        case CheckoutMode::CodeOnly:
            store_->get(target);
            throw Error(ErrorCode::UnsafeOnlyCode, "UnsafeOnlyCode: checking out code without its data is not allowed");
    }
}

void Session::annotate(const CommitId& id, std::optional<std::string> tag, std::optional<std::string> message) {
    if (tag) require_utf8(*tag, "tag");
    if (message) require_utf8(*message, "message");
    store_->annotate(id, std::move(tag), std::move(message));
}

}  // namespace statevc
