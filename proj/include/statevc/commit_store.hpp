#pragma once

// Append-only commit storage.
//
// Layout of a store directory:
//   log.bin   records: u32 little-endian payload length, u32 crc32 of the
//             payload, payload = compact JSON with sorted keys. A torn tail
//             record is truncated on open.
//   index     "<commit id> <byte offset>" per line; rebuilt on open when
//             missing or stale.
//   HEAD      two lines: head-code commit id, head-data commit id.
//   branches  "<name> <commit id>" per line, sorted by name.
//   .lock     advisory lock used by the CLI.

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "statevc/commit.hpp"

namespace statevc {

struct StoreOptions {
    /// fsync after each append and metadata write.
    bool durable = false;
    /// Milliseconds since epoch for created_at; wall clock when empty.
    std::function<std::int64_t()> clock;
};

/// Output of one history entry, as shown by its cell right after it ran.
struct ExecutionRecord {
    HistoryEntry entry;
    std::string output;
    bool error = false;

    bool operator==(const ExecutionRecord&) const = default;
};

class CommitStore {
public:
    /// Opens (creating if needed) the store directory and loads the log.
    explicit CommitStore(std::filesystem::path dir, StoreOptions options = {});
    ~CommitStore();

    CommitStore(const CommitStore&) = delete;
    CommitStore& operator=(const CommitStore&) = delete;

    const std::filesystem::path& dir() const noexcept { return dir_; }

    /// Validates and appends; returns the content id. Persisting a commit
    /// whose content already exists returns the existing id. `c.id` and
    /// `c.created_at` on input are ignored.
    CommitId persist_commit(Commit c);

    bool contains(const CommitId& id) const;
    bool empty() const;
    std::size_t size() const;

    /// Throws Error(UnknownCommit).
    std::shared_ptr<const Commit> get(const CommitId& id) const;

    /// All commit ids in append order.
    std::vector<CommitId> commit_ids() const;

    /// Full id for an unambiguous prefix of at least 4 hex digits.
    std::optional<CommitId> resolve(std::string_view prefix) const;

    std::shared_ptr<const VariableVersionTable> version_table(const CommitId& id) const;
    Environment materialize_variables(const CommitId& id) const;
    ChangedVariables changed_variables(const CommitId& id) const;
    std::vector<HistoryEntry> history_at(const CommitId& id) const;
    std::vector<ExecutionRecord> executions_at(const CommitId& id) const;

    /// Retags or re-messages an existing commit; stored as an annotation
    /// record so the commit's content id is unchanged.
    void annotate(const CommitId& id, std::optional<std::string> tag, std::optional<std::string> message);

    std::optional<Head> read_head() const;
    void write_head(const Head& head);

    BranchMap branches() const;
    void set_branch(const std::string& name, const CommitId& id);

    /// Number of Values held in all var_delta maps.
    std::size_t stored_value_count() const;

    /// Bytes of log.bin that were dropped as a torn tail when opening.
    std::size_t truncated_bytes() const noexcept { return truncated_bytes_; }

private:
    void load();
    void append_record(const std::string& payload, std::uint64_t* offset_out);
    void write_text_atomically(const std::filesystem::path& path, const std::string& text);
    void validate(const Commit& c) const;
    void apply_annotation(const CommitId& id, const std::optional<std::string>& tag, const std::optional<std::string>& message);
    std::shared_ptr<const Commit> get_locked(const CommitId& id) const;

    std::filesystem::path dir_;
    StoreOptions options_;
    int log_fd_ = -1;
    std::uint64_t log_size_ = 0;
    std::size_t truncated_bytes_ = 0;

    mutable std::shared_mutex mutex_;
    std::unordered_map<CommitId, std::shared_ptr<const Commit>> commits_;
    std::unordered_map<CommitId, std::uint64_t> offsets_;
    std::vector<CommitId> order_;
    std::size_t stored_values_ = 0;

    mutable std::mutex memo_mutex_;
    mutable std::unordered_map<CommitId, std::shared_ptr<const VariableVersionTable>> tables_;
};

}  // namespace statevc
