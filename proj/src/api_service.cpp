#include "statevc/api_service.hpp"

#include <httplib.h>

#include <chrono>
#include <charconv>

#include "statevc/payload.hpp"
#include "statevc/search.hpp"

namespace statevc {

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadRequest:
        case ErrorCode::BadQuery:
        case ErrorCode::NotCodeCell:
        case ErrorCode::MissingParent:
        case ErrorCode::InvalidCommit: return 400;
        case ErrorCode::UnknownCommit:
        case ErrorCode::UnknownCell:
        case ErrorCode::UnknownGroup:
        case ErrorCode::EmptyStore: return 404;
        case ErrorCode::UnsafeOnlyCode:
        case ErrorCode::UnsafeFutureData:
        case ErrorCode::UnsafeUnrelatedData:
        case ErrorCode::StoreLocked: return 409;
        case ErrorCode::CorruptDelta:
        case ErrorCode::StorageIO: return 500;
    }
    return 500;
}

namespace {

[[noreturn]] void bad_request(const std::string& why) { throw Error(ErrorCode::BadRequest, why); }

std::size_t size_param(const httplib::Request& req, const char* name, std::size_t fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string text = req.get_param_value(name);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) bad_request(std::string("parameter '") + name + "' must be a non-negative integer");
    return v;
}

bool bool_param(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return false;
    const std::string v = req.get_param_value(name);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_request(std::string("parameter '") + name + "' must be true or false");
}

template <class T>
T field(const codec::Json& body, const char* name) {
    auto it = body.find(name);
    if (it == body.end() || it->is_null()) bad_request(std::string("missing field '") + name + "'");
    try {
        return it->get<T>();
    } catch (const codec::Json::exception&) {
        bad_request(std::string("field '") + name + "' has the wrong type");
    }
}

template <class T>
std::optional<T> optional_field(const codec::Json& body, const char* name) {
    auto it = body.find(name);
    if (it == body.end() || it->is_null()) return std::nullopt;
    return field<T>(body, name);
}

}  // namespace

ApiService::ApiService(Session& session, ApiOptions options)
    : session_(session), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    routes();
}

ApiService::~ApiService() { stop(); }

int ApiService::bind() {
    if (options_.port == 0) return server_->bind_to_any_port(options_.host);
    return server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
}

void ApiService::listen() { server_->listen_after_bind(); }

void ApiService::stop() {
    if (server_) server_->stop();
    events_.notify_all();
}

std::uint64_t ApiService::revision() const {
    std::lock_guard lock(event_mutex_);
    return revision_;
}

void ApiService::reply(httplib::Response& res, int status, const Json& body) const {
    res.status = status;
    res.set_content(body.dump(-1, ' ', false, Json::error_handler_t::replace), "application/json");
}

void ApiService::fail(httplib::Response& res, const Error& e) const { reply(res, http_status(e.code()), payload::error(e)); }

template <class F>
void ApiService::read(httplib::Response& res, F&& body) {
    try {
        std::shared_lock lock(state_mutex_);
        reply(res, 200, body());
    } catch (const Error& e) {
        fail(res, e);
    }
}

template <class F>
void ApiService::write(httplib::Response& res, F&& body) {
    try {
        Json out;
        {
            std::unique_lock lock(state_mutex_);
            out = body();
        }
        {
            std::lock_guard lock(event_mutex_);
            ++revision_;
        }
        events_.notify_all();
        reply(res, 200, out);
    } catch (const Error& e) {
        fail(res, e);
    }
}

CommitId ApiService::resolve(const std::string& text) const {
    if (auto full = CommitId::parse(text); full && session_.store().contains(*full)) return *full;
    if (auto id = session_.store().resolve(text)) return *id;
    throw Error(ErrorCode::UnknownCommit, "unknown commit '" + text + "'");
}

ApiService::Json ApiService::parse_body(const httplib::Request& req) {
    try {
        Json body = Json::parse(req.body);
        if (!body.is_object()) bad_request("request body must be a JSON object");
        return body;
    } catch (const Json::exception&) {
        bad_request("request body is not valid JSON");
    }
}

void ApiService::routes() {
    auto& s = *server_;

    s.set_exception_handler([this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const Error& e) {
            fail(res, e);
        } catch (const std::exception& e) {
            fail(res, Error(ErrorCode::StorageIO, e.what()));
        }
    });

    s.Get("/graph", [this](const httplib::Request& req, httplib::Response& res) {
        read(res, [&] { return payload::graph(session_.store(), session_.head(), bool_param(req, "fold")); });
    });

    s.Get(R"(/commit/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
        read(res, [&] { return payload::commit(session_.store(), resolve(req.matches[1])); });
    });

    s.Get(R"(/commit/([0-9a-f]+)/variables)", [this](const httplib::Request& req, httplib::Response& res) {
        read(res, [&] {
            payload::VariablePage page;
            page.page = size_param(req, "page", 0);
            page.page_size = size_param(req, "page_size", options_.page_size);
            page.filter = req.has_param("filter") ? req.get_param_value("filter") : "";
            page.repr_cap = options_.repr_cap;
            const CommitId id = resolve(req.matches[1]);
            Json out = payload::variables(session_.store().materialize_variables(id), page);
            out["commit"] = id.str();
            return out;
        });
    });

    s.Get("/search", [this](const httplib::Request& req, httplib::Response& res) {
        read(res, [&] {
            const auto query = SearchQuery::parse(req.has_param("q") ? req.get_param_value("q") : "");
            return payload::search(search(session_.store(), query));
        });
    });

    s.Get("/diff", [this](const httplib::Request& req, httplib::Response& res) {
        read(res, [&] {
            if (!req.has_param("a") || !req.has_param("b")) bad_request("parameters 'a' and 'b' are required");
            return payload::diff(session_.store(), resolve(req.get_param_value("a")), resolve(req.get_param_value("b")));
        });
    });

    s.Get("/head", [this](const httplib::Request&, httplib::Response& res) {
        read(res, [&] { return payload::head(session_); });
    });

    s.Get("/notebook", [this](const httplib::Request&, httplib::Response& res) {
        read(res, [&] { return payload::notebook(session_); });
    });

    s.Get("/events", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            const std::uint64_t since = size_param(req, "since", 0);
            const auto wait = std::min<std::size_t>(size_param(req, "timeout_ms", 25000), static_cast<std::size_t>(options_.max_poll_ms));
            std::unique_lock lock(event_mutex_);
            events_.wait_for(lock, std::chrono::milliseconds(wait),
                             [&] { return revision_ > since || !server_->is_running(); });
            reply(res, 200, Json{{"revision", revision_}, {"changed", revision_ > since}});
        } catch (const Error& e) {
            fail(res, e);
        }
    });

    s.Post("/execute", [this](const httplib::Request& req, httplib::Response& res) {
        write(res, [&] {
            const Json body = parse_body(req);
            const auto cell_id = field<std::string>(body, "cell_id");
            const CommitId id = session_.execute_cell(cell_id);
            Json cell = codec::to_json(*session_.notebook().find(cell_id));
            return Json{{"commit", id.str()}, {"cell", std::move(cell)}, {"head", payload::head(session_)}};
        });
    });

    s.Post("/cells", [this](const httplib::Request& req, httplib::Response& res) {
        write(res, [&] {
            const Json body = parse_body(req);
            const auto op = field<std::string>(body, "op");
            Json out = Json::object();
            if (op == "add") {
                auto kind = parse_cell_kind(optional_field<std::string>(body, "kind").value_or("code"));
                if (!kind) bad_request("kind must be code or markdown");
                auto position = optional_field<std::size_t>(body, "position");
                out["cell_id"] = session_.add_cell(*kind, optional_field<std::string>(body, "source").value_or(""), position);
            } else if (op == "edit") {
                session_.edit_cell(field<std::string>(body, "id"), field<std::string>(body, "source"));
            } else if (op == "delete") {
                session_.delete_cell(field<std::string>(body, "id"));
            } else if (op == "move") {
                session_.move_cell(field<std::string>(body, "id"), field<std::size_t>(body, "position"));
            } else {
                bad_request("op must be add, edit, delete or move");
            }
            out["notebook"] = payload::notebook(session_);
            return out;
        });
    });

    s.Post("/checkout", [this](const httplib::Request& req, httplib::Response& res) {
        write(res, [&] {
            const Json body = parse_body(req);
            const CommitId target = resolve(field<std::string>(body, "commit"));
            const auto mode = optional_field<std::string>(body, "mode").value_or("both");
            if (mode == "both") {
                session_.checkout(target, CheckoutMode::Both);
            } else if (mode == "data") {
                session_.checkout(target, CheckoutMode::DataOnly);
            } else if (mode == "code") {
                session_.checkout(target, CheckoutMode::CodeOnly);
            } else {
                bad_request("mode must be both, data or code");
            }
            return payload::head(session_);
        });
    });

    s.Post("/tag", [this](const httplib::Request& req, httplib::Response& res) {
        write(res, [&] {
            const Json body = parse_body(req);
            const CommitId target = resolve(field<std::string>(body, "commit"));
            session_.annotate(target, optional_field<std::string>(body, "tag"), optional_field<std::string>(body, "message"));
            return payload::commit(session_.store(), target);
        });
    });

    s.Post("/commit", [this](const httplib::Request& req, httplib::Response& res) {
        write(res, [&] {
            const Json body = req.body.empty() ? Json::object() : parse_body(req);
            const CommitId id =
                session_.commit_manual(optional_field<std::string>(body, "message"), optional_field<std::string>(body, "tag"));
            return Json{{"commit", id.str()}, {"head", payload::head(session_)}};
        });
    });
}

}  // namespace statevc
