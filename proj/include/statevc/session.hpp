#pragma once

// The live notebook session: working copy, kernel state and heads.
//
// Every execution persists a commit whose code parent is the head-code
// commit and whose data parent is the head-data commit; both heads then
// move to it. A data rollback moves only the head-data commit, which splits
// the head until the next commit.
//
// A code cell shows an execution counter exactly when the current history
// executed it with its current source; the counter is the position of the
// last such execution and the output is that execution's output. Cells that
// lose the status keep their last output on display.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "statevc/commit.hpp"
#include "statevc/commit_store.hpp"
#include "statevc/error.hpp"
#include "statevc/model.hpp"
#include "statevc/value.hpp"

namespace statevc {

class Session {
public:
    /// Starts on `store`. An empty store gets a root commit holding the
    /// empty notebook on branch "main"; otherwise the session resumes from
    /// HEAD as recover_latest does.
    static Session open(CommitStore& store);

    /// Rebuilds the session from HEAD (or the newest commit when HEAD is
    /// missing). Throws Error(EmptyStore).
    static Session recover_latest(CommitStore& store);

    const CodeState& notebook() const noexcept { return notebook_; }
    const Environment& env() const noexcept { return env_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }
    const std::vector<ExecutionRecord>& executions() const noexcept { return executions_; }
    const Head& head() const noexcept { return head_; }
    /// Branch the head-code commit is the tip of; empty when it is not a tip.
    const std::string& branch() const noexcept { return branch_; }
    std::int64_t next_counter() const noexcept { return static_cast<std::int64_t>(history_.size()) + 1; }
    /// True when the working copy has edits no commit holds yet.
    bool dirty() const noexcept { return dirty_; }

    Version version() const { return {notebook_, {env_, history_}}; }
    CommitStore& store() const noexcept { return *store_; }

    /// Inserts a cell at `position` (end when absent) and returns its id.
    CellId add_cell(CellKind kind, std::string source, std::optional<std::size_t> position = std::nullopt);
    void edit_cell(const CellId& id, std::string source);
    void delete_cell(const CellId& id);
    void move_cell(const CellId& id, std::size_t position);

    /// Replaces the working copy. Counters and outputs of code cells are
    /// re-derived from the current history.
    void replace_notebook(CodeState code);

    CommitId execute_cell(const CellId& id);
    CommitId commit_manual(std::optional<std::string> message = std::nullopt, std::optional<std::string> tag = std::nullopt);

    CheckoutClass classify(const CommitId& target, CheckoutMode mode) const;

    /// Restores code and data of `target`.
    void checkout_both(const CommitId& target);

    /// Restores only the data of `target`, keeping the working copy. Throws
    /// Error(UnsafeFutureData | UnsafeUnrelatedData) and leaves the session
    /// untouched unless the target's history is a prefix of the current one.
    void rollback_data(const CommitId& target);

    /// Dispatches on mode; CodeOnly always throws Error(UnsafeOnlyCode).
    void checkout(const CommitId& target, CheckoutMode mode);

    /// Sets or clears (empty string) a commit's tag and message.
    void annotate(const CommitId& id, std::optional<std::string> tag, std::optional<std::string> message);

private:
    explicit Session(CommitStore& store) : store_(&store) {}

    void load_data(const CommitId& data);
    void sync_cells();
    void sync_cell(Cell& cell) const;
    std::string next_branch() const;
    CellId fresh_cell_id();
    Cell& cell_or_throw(const CellId& id);
    void advance(const CommitId& id, const std::string& branch);

    CommitStore* store_;
    CodeState notebook_;
    Environment env_;
    std::vector<HistoryEntry> history_;
    std::vector<ExecutionRecord> executions_;
    Head head_;
    std::string branch_;
    std::uint64_t next_cell_ = 1;
    bool dirty_ = false;
};

/// Error code that rejects a checkout of the given class.
ErrorCode rejection_code(CheckoutClass c);

}  // namespace statevc
