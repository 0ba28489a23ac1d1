#include "statevc/codec.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdlib>

#include "statevc/error.hpp"

namespace statevc::codec {

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::StorageIO, "malformed record: " + what); }

double parse_float(const std::string& text) {
    if (text == "nan") return std::nan("");
    if (text == "inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    char* end = nullptr;
    double d = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) malformed("float '" + text + "'");
    return d;
}

template <class T>
std::optional<T> optional_field(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

Json to_json(const Value& v) {
    return std::visit(
        [](const auto& x) -> Json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, None>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
                return Json{{"float", format_float(x)}};
            } else if constexpr (std::is_same_v<T, List>) {
                Json arr = Json::array();
                for (const auto& item : x) arr.push_back(to_json(item));
                return arr;
            } else {
                return x;
            }
        },
        v.data);
}

Value value_from_json(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return Value::none();
        case Json::value_t::boolean: return Value::boolean(j.get<bool>());
        case Json::value_t::number_integer: return Value::integer(j.get<std::int64_t>());
        case Json::value_t::number_unsigned: {
            auto u = j.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(INT64_MAX)) malformed("integer out of range");
            return Value::integer(static_cast<std::int64_t>(u));
        }
        case Json::value_t::string: return Value::string(j.get<std::string>());
        case Json::value_t::array: {
            List items;
            items.reserve(j.size());
            for (const auto& item : j) items.push_back(value_from_json(item));
            return Value::list(std::move(items));
        }
        case Json::value_t::object:
            if (j.size() == 1 && j.contains("float") && j["float"].is_string()) return Value::real(parse_float(j["float"].get<std::string>()));
            break;
        default: break;
    }
    malformed("value " + j.dump());
}

Json to_json(const Cell& c) {
    Json j{{"id", c.id}, {"kind", to_string(c.kind)}, {"source", c.source}, {"output", c.output}, {"error", c.error}};
    j["counter"] = c.exec_counter ? Json(*c.exec_counter) : Json(nullptr);
    return j;
}

Cell cell_from_json(const Json& j) {
    Cell c;
    c.id = j.at("id").get<std::string>();
    auto kind = parse_cell_kind(j.at("kind").get<std::string>());
    if (!kind) malformed("cell kind");
    c.kind = *kind;
    c.source = j.at("source").get<std::string>();
    c.output = j.value("output", std::string{});
    c.error = j.value("error", false);
    c.exec_counter = optional_field<std::int64_t>(j, "counter");
    return c;
}

Json to_json(const CodeState& code) {
    Json arr = Json::array();
    for (const auto& c : code.cells) arr.push_back(to_json(c));
    return arr;
}

CodeState code_from_json(const Json& j) {
    CodeState code;
    for (const auto& c : j) code.cells.push_back(cell_from_json(c));
    return code;
}

Json to_json(const HistoryEntry& h) { return Json{{"cell_id", h.cell_id}, {"source", h.source}, {"counter", h.counter}}; }

HistoryEntry history_entry_from_json(const Json& j) {
    return {j.at("cell_id").get<std::string>(), j.at("source").get<std::string>(), j.at("counter").get<std::int64_t>()};
}

Json commit_record(const Commit& c) {
    auto opt_id = [](const std::optional<CommitId>& id) { return id ? Json(id->str()) : Json(nullptr); };
    auto opt_str = [](const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); };
    Json delta = Json::object();
    for (const auto& [name, value] : c.var_delta) delta[name] = to_json(value);
    Json deleted = Json::array();
    for (const auto& name : c.var_deleted) deleted.push_back(name);
    return Json{
        {"code_parent", opt_id(c.code_parent)},
        {"data_parent", opt_id(c.data_parent)},
        {"code", to_json(c.code)},
        {"history_len", c.history_len},
        {"history_tail", c.history_tail ? to_json(*c.history_tail) : Json(nullptr)},
        {"var_delta", std::move(delta)},
        {"var_deleted", std::move(deleted)},
        {"message", opt_str(c.message)},
        {"tag", opt_str(c.tag)},
        {"branch", c.branch},
        {"kind", to_string(c.kind)},
    };
}

Commit commit_from_record(const Json& r, CommitId id, std::int64_t created_at) {
    try {
        Commit c;
        c.id = std::move(id);
        auto parent = [&](const char* key) -> std::optional<CommitId> {
            auto s = optional_field<std::string>(r, key);
            if (!s) return std::nullopt;
            auto parsed = CommitId::parse(*s);
            if (!parsed) malformed(std::string(key));
            return parsed;
        };
        c.code_parent = parent("code_parent");
        c.data_parent = parent("data_parent");
        c.code = code_from_json(r.at("code"));
        c.history_len = r.at("history_len").get<std::int64_t>();
        if (!r.at("history_tail").is_null()) c.history_tail = history_entry_from_json(r.at("history_tail"));
        for (const auto& [name, value] : r.at("var_delta").items()) c.var_delta.emplace(name, value_from_json(value));
        for (const auto& name : r.at("var_deleted")) c.var_deleted.insert(name.get<std::string>());
        c.message = optional_field<std::string>(r, "message");
        c.tag = optional_field<std::string>(r, "tag");
        c.branch = r.at("branch").get<std::string>();
        const auto kind = r.at("kind").get<std::string>();
        if (kind != "auto" && kind != "manual") malformed("commit kind");
        c.kind = kind == "auto" ? CommitKind::Auto : CommitKind::Manual;
        c.created_at = created_at;
        return c;
    } catch (const Json::exception& e) {
        malformed(e.what());
    }
}

std::string canonical(const Json& j) { return j.dump(); }

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::StorageIO, "sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

CommitId compute_id(const Commit& c) { return CommitId(sha256_hex(canonical(commit_record(c)))); }

}  // namespace statevc::codec
