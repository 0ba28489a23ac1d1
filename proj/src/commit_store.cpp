#include "statevc/commit_store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "statevc/codec.hpp"
#include "statevc/error.hpp"

namespace statevc {

namespace fs = std::filesystem;
using codec::Json;

namespace {

constexpr std::size_t kHeaderSize = 8;
constexpr std::uint32_t kMaxRecord = 1u << 30;

[[noreturn]] void io_error(const std::string& what) {
    throw Error(ErrorCode::StorageIO, what + (errno ? std::string(": ") + std::strerror(errno) : std::string()));
}

[[noreturn]] void unknown_commit(const CommitId& id) {
    throw Error(ErrorCode::UnknownCommit, "unknown commit " + id.str());
}

std::uint32_t crc_of(std::string_view bytes) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(int fd, const std::string& bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
        ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            io_error("write failed");
        }
        done += static_cast<std::size_t>(n);
    }
}

}  // namespace

std::optional<CommitId> CommitId::parse(std::string_view text) {
    if (text.size() != kLength) return std::nullopt;
    if (!std::all_of(text.begin(), text.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); })) {
        return std::nullopt;
    }
    return CommitId(std::string(text));
}

std::string_view to_string(CommitKind kind) { return kind == CommitKind::Auto ? "auto" : "manual"; }

CommitStore::CommitStore(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(std::move(options)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::StorageIO, "cannot create store directory " + dir_.string() + ": " + ec.message());
    errno = 0;
    log_fd_ = ::open((dir_ / "log.bin").c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (log_fd_ < 0) io_error("cannot open " + (dir_ / "log.bin").string());
    load();
}

CommitStore::~CommitStore() {
    if (log_fd_ >= 0) ::close(log_fd_);
}

void CommitStore::load() {
    const std::string log = read_file(dir_ / "log.bin");
    std::size_t at = 0;
    std::string expected_index;

    auto torn = [&](std::size_t record_end) { return record_end >= log.size(); };

    while (at < log.size()) {
        if (log.size() - at < kHeaderSize) break;
        const std::uint32_t len = get_u32(log, at);
        const std::uint32_t crc = get_u32(log, at + 4);
        const std::size_t end = at + kHeaderSize + len;
        if (len > kMaxRecord || end > log.size()) break;
        const std::string_view payload(log.data() + at + kHeaderSize, len);
        if (crc_of(payload) != crc) {
            if (torn(end)) break;
            throw Error(ErrorCode::StorageIO, "checksum mismatch in log.bin at offset " + std::to_string(at));
        }
        Json record;
        try {
            record = Json::parse(payload);
        } catch (const Json::exception&) {
            throw Error(ErrorCode::StorageIO, "unparseable record in log.bin at offset " + std::to_string(at));
        }

        const std::string type = record.value("type", "");
        if (type == "commit") {
            const Json& body = record.at("record");
            auto id = CommitId::parse(record.at("id").get<std::string>());
            if (!id || id->str() != codec::sha256_hex(codec::canonical(body))) {
                throw Error(ErrorCode::StorageIO, "commit id does not match content at offset " + std::to_string(at));
            }
            auto commit = std::make_shared<const Commit>(codec::commit_from_record(body, *id, record.at("created_at").get<std::int64_t>()));
            for (const auto& parent : {commit->code_parent, commit->data_parent}) {
                if (parent && !commits_.contains(*parent)) {
                    throw Error(ErrorCode::StorageIO, "commit " + id->str() + " precedes its parent in log.bin");
                }
            }
            stored_values_ += commit->var_delta.size();
            commits_.emplace(*id, std::move(commit));
            offsets_.emplace(*id, at);
            order_.push_back(*id);
            expected_index += id->str() + " " + std::to_string(at) + "\n";
        } else if (type == "annotate") {
            auto id = CommitId::parse(record.at("id").get<std::string>());
            if (!id || !commits_.contains(*id)) throw Error(ErrorCode::StorageIO, "annotation for unknown commit");
            auto opt = [&](const char* key) -> std::optional<std::string> {
                if (!record.contains(key) || record[key].is_null()) return std::nullopt;
                return record[key].get<std::string>();
            };
            apply_annotation(*id, opt("tag"), opt("message"));
        } else {
            throw Error(ErrorCode::StorageIO, "unknown record type '" + type + "' in log.bin");
        }
        at = end;
    }

    if (at < log.size()) {
        truncated_bytes_ = log.size() - at;
        if (::ftruncate(log_fd_, static_cast<off_t>(at)) != 0) io_error("cannot truncate torn log tail");
    }
    log_size_ = at;

    if (read_file(dir_ / "index") != expected_index) write_text_atomically(dir_ / "index", expected_index);

    // HEAD must name known commits when present.
    if (auto head = read_head()) {
        if (!commits_.contains(head->code) || !commits_.contains(head->data)) {
            throw Error(ErrorCode::StorageIO, "HEAD names a commit missing from log.bin");
        }
    }
}

void CommitStore::append_record(const std::string& payload, std::uint64_t* offset_out) {
    std::string framed;
    framed.reserve(payload.size() + kHeaderSize);
    put_u32(framed, static_cast<std::uint32_t>(payload.size()));
    put_u32(framed, crc_of(payload));
    framed += payload;
    errno = 0;
    write_all(log_fd_, framed);
    if (options_.durable && ::fsync(log_fd_) != 0) io_error("fsync failed");
    if (offset_out) *offset_out = log_size_;
    log_size_ += framed.size();
}

void CommitStore::write_text_atomically(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    errno = 0;
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) io_error("cannot write " + tmp.string());
    try {
        write_all(fd, text);
        if (options_.durable && ::fsync(fd) != 0) io_error("fsync failed");
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) io_error("cannot rename " + tmp.string());
}

std::shared_ptr<const Commit> CommitStore::get_locked(const CommitId& id) const {
    auto it = commits_.find(id);
    if (it == commits_.end()) unknown_commit(id);
    return it->second;
}

std::shared_ptr<const Commit> CommitStore::get(const CommitId& id) const {
    std::shared_lock lock(mutex_);
    return get_locked(id);
}

bool CommitStore::contains(const CommitId& id) const {
    std::shared_lock lock(mutex_);
    return commits_.contains(id);
}

bool CommitStore::empty() const {
    std::shared_lock lock(mutex_);
    return order_.empty();
}

std::size_t CommitStore::size() const {
    std::shared_lock lock(mutex_);
    return order_.size();
}

std::vector<CommitId> CommitStore::commit_ids() const {
    std::shared_lock lock(mutex_);
    return order_;
}

std::optional<CommitId> CommitStore::resolve(std::string_view prefix) const {
    if (prefix.size() < 4 || prefix.size() > CommitId::kLength) return std::nullopt;
    std::shared_lock lock(mutex_);
    std::optional<CommitId> found;
    for (const auto& id : order_) {
        if (id.str().compare(0, prefix.size(), prefix) == 0) {
            if (found) return std::nullopt;
            found = id;
        }
    }
    return found;
}

void CommitStore::validate(const Commit& c) const {
    auto invalid = [](const std::string& what) { throw Error(ErrorCode::InvalidCommit, what); };
    std::int64_t parent_len = 0;
    for (const auto& parent : {c.code_parent, c.data_parent}) {
        if (parent && !contains(*parent)) throw Error(ErrorCode::MissingParent, "missing parent " + parent->str());
    }
    if (c.code_parent.has_value() != c.data_parent.has_value()) invalid("a commit has both parents or neither");

    std::shared_ptr<const VariableVersionTable> parent_table;
    if (c.data_parent) {
        parent_len = get(*c.data_parent)->history_len;
        parent_table = version_table(*c.data_parent);
    }
    if (c.history_tail) {
        if (c.history_len != parent_len + 1) invalid("execution must extend the data parent's history by one");
        if (c.history_tail->counter != c.history_len) invalid("history tail counter must equal history length");
    } else if (c.history_len != parent_len) {
        invalid("commit without execution must keep the data parent's history length");
    }
    for (const auto& name : c.var_deleted) {
        if (c.var_delta.contains(name)) invalid("variable '" + name + "' is both changed and deleted");
        if (!parent_table || !parent_table->contains(name)) invalid("deleted variable '" + name + "' is not live in the data parent");
    }
    for (const auto& [name, value] : c.var_delta) {
        if (!is_identifier(name)) invalid("invalid variable name '" + name + "'");
    }
    std::set<std::string_view> ids;
    for (const auto& cell : c.code.cells) {
        if (!ids.insert(cell.id).second) invalid("duplicate cell id '" + cell.id + "'");
    }
}

CommitId CommitStore::persist_commit(Commit c) {
    c.id = codec::compute_id(c);
    if (contains(c.id)) return c.id;
    validate(c);

    c.created_at = options_.clock ? options_.clock()
                                  : std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::system_clock::now().time_since_epoch())
                                        .count();
    Json envelope{{"type", "commit"}, {"id", c.id.str()}, {"created_at", c.created_at}, {"record", codec::commit_record(c)}};

    std::unique_lock lock(mutex_);
    if (commits_.contains(c.id)) return c.id;
    std::uint64_t offset = 0;
    append_record(codec::canonical(envelope), &offset);

    errno = 0;
    int fd = ::open((dir_ / "index").c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) io_error("cannot open index");
    try {
        write_all(fd, c.id.str() + " " + std::to_string(offset) + "\n");
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);

    CommitId id = c.id;
    stored_values_ += c.var_delta.size();
    offsets_.emplace(id, offset);
    order_.push_back(id);
    commits_.emplace(id, std::make_shared<const Commit>(std::move(c)));
    return id;
}

void CommitStore::apply_annotation(const CommitId& id, const std::optional<std::string>& tag,
                                   const std::optional<std::string>& message) {
    auto updated = std::make_shared<Commit>(*commits_.at(id));
    if (tag) updated->tag = tag->empty() ? std::nullopt : tag;
    if (message) updated->message = message->empty() ? std::nullopt : message;
    commits_[id] = std::move(updated);
}

void CommitStore::annotate(const CommitId& id, std::optional<std::string> tag, std::optional<std::string> message) {
    Json record{{"type", "annotate"}, {"id", id.str()}};
    record["tag"] = tag ? Json(*tag) : Json(nullptr);
    record["message"] = message ? Json(*message) : Json(nullptr);
    std::unique_lock lock(mutex_);
    if (!commits_.contains(id)) unknown_commit(id);
    append_record(codec::canonical(record), nullptr);
    apply_annotation(id, tag, message);
}

std::shared_ptr<const VariableVersionTable> CommitStore::version_table(const CommitId& id) const {
    std::lock_guard memo(memo_mutex_);
    if (auto it = tables_.find(id); it != tables_.end()) return it->second;

    // Walk up the data-parent chain to the nearest memoized table, then
    // build forward.
    std::vector<std::shared_ptr<const Commit>> chain;
    std::shared_ptr<const VariableVersionTable> base;
    std::optional<CommitId> cursor = id;
    while (cursor) {
        if (auto it = tables_.find(*cursor); it != tables_.end()) {
            base = it->second;
            break;
        }
        auto commit = get(*cursor);
        chain.push_back(commit);
        cursor = commit->data_parent;
    }
    if (!base) base = std::make_shared<const VariableVersionTable>();

    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        const Commit& c = **it;
        if (c.var_delta.empty() && c.var_deleted.empty()) {
            tables_.emplace(c.id, base);
            continue;
        }
        auto table = std::make_shared<VariableVersionTable>(*base);
        for (const auto& name : c.var_deleted) table->erase(name);
        for (const auto& [name, value] : c.var_delta) (*table)[name] = c.id;
        base = std::move(table);
        tables_.emplace(c.id, base);
    }
    return base;
}

Environment CommitStore::materialize_variables(const CommitId& id) const {
    Environment env;
    for (const auto& [name, source] : *version_table(id)) {
        auto commit = get(source);
        auto it = commit->var_delta.find(name);
        if (it == commit->var_delta.end()) {
            throw Error(ErrorCode::CorruptDelta, "commit " + source.str() + " has no stored value for '" + name + "'");
        }
        env.set(name, it->second);
    }
    return env;
}

ChangedVariables CommitStore::changed_variables(const CommitId& id) const {
    auto commit = get(id);
    ChangedVariables out;
    for (const auto& [name, value] : commit->var_delta) out.changed.insert(name);
    out.deleted = commit->var_deleted;
    return out;
}

std::vector<ExecutionRecord> CommitStore::executions_at(const CommitId& id) const {
    std::vector<ExecutionRecord> out;
    auto commit = get(id);
    const std::int64_t expected = commit->history_len;
    for (;;) {
        if (commit->history_tail) {
            ExecutionRecord rec{*commit->history_tail, {}, false};
            if (const Cell* cell = commit->code.find(rec.entry.cell_id)) {
                rec.output = cell->output;
                rec.error = cell->error;
            }
            out.push_back(std::move(rec));
        }
        if (!commit->data_parent) break;
        commit = get(*commit->data_parent);
    }
    std::reverse(out.begin(), out.end());
    if (static_cast<std::int64_t>(out.size()) != expected) {
        throw Error(ErrorCode::StorageIO, "history chain of " + id.str() + " does not match its history length");
    }
    return out;
}

std::vector<HistoryEntry> CommitStore::history_at(const CommitId& id) const {
    std::vector<HistoryEntry> out;
    auto commit = get(id);
    const std::int64_t expected = commit->history_len;
    for (;;) {
        if (commit->history_tail) out.push_back(*commit->history_tail);
        if (!commit->data_parent) break;
        commit = get(*commit->data_parent);
    }
    std::reverse(out.begin(), out.end());
    if (static_cast<std::int64_t>(out.size()) != expected) {
        throw Error(ErrorCode::StorageIO, "history chain of " + id.str() + " does not match its history length");
    }
    return out;
}

std::optional<Head> CommitStore::read_head() const {
    const std::string text = read_file(dir_ / "HEAD");
    if (text.empty()) return std::nullopt;
    std::istringstream in(text);
    std::string code, data;
    std::getline(in, code);
    std::getline(in, data);
    auto c = CommitId::parse(code);
    auto d = CommitId::parse(data);
    if (!c || !d) throw Error(ErrorCode::StorageIO, "malformed HEAD file");
    return Head{*c, *d};
}

void CommitStore::write_head(const Head& head) {
    if (!contains(head.code)) unknown_commit(head.code);
    if (!contains(head.data)) unknown_commit(head.data);
    write_text_atomically(dir_ / "HEAD", head.code.str() + "\n" + head.data.str() + "\n");
}

BranchMap CommitStore::branches() const {
    BranchMap out;
    std::istringstream in(read_file(dir_ / "branches"));
    std::string line;
    while (std::getline(in, line)) {
        auto space = line.rfind(' ');
        if (space == std::string::npos) throw Error(ErrorCode::StorageIO, "malformed branches file");
        auto id = CommitId::parse(std::string_view(line).substr(space + 1));
        if (!id) throw Error(ErrorCode::StorageIO, "malformed branches file");
        out.emplace(line.substr(0, space), *id);
    }
    return out;
}

void CommitStore::set_branch(const std::string& name, const CommitId& id) {
    if (name.empty() || name.find_first_of(" \n\r\t") != std::string::npos) {
        throw Error(ErrorCode::BadRequest, "invalid branch name '" + name + "'");
    }
    if (!contains(id)) unknown_commit(id);
    BranchMap map = branches();
    map[name] = id;
    std::string text;
    for (const auto& [n, cid] : map) text += n + " " + cid.str() + "\n";
    write_text_atomically(dir_ / "branches", text);
}

std::size_t CommitStore::stored_value_count() const {
    std::shared_lock lock(mutex_);
    return stored_values_;
}

}  // namespace statevc
