#pragma once

// Local HTTP/JSON interface over one session. Endpoints and schemas are
// listed in docs/api.md.

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "statevc/codec.hpp"
#include "statevc/commit_store.hpp"
#include "statevc/error.hpp"
#include "statevc/session.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace statevc {

struct ApiOptions {
    std::string host = "127.0.0.1";
    int port = 8765;
    std::size_t repr_cap = 256;
    std::size_t page_size = 50;
    int max_poll_ms = 30000;
};

/// HTTP status for an error code.
int http_status(ErrorCode code);

class ApiService {
public:
    ApiService(Session& session, ApiOptions options = {});
    ~ApiService();

    ApiService(const ApiService&) = delete;
    ApiService& operator=(const ApiService&) = delete;

    /// Binds host:port (port 0 picks a free one). Returns the bound port, or
    /// -1 when binding failed.
    int bind();
    /// Serves until stop(); call after bind().
    void listen();
    void stop();

    /// Bumped after every successful mutation.
    std::uint64_t revision() const;

private:
    using Json = codec::Json;

    void routes();
    void reply(httplib::Response& res, int status, const Json& body) const;
    void fail(httplib::Response& res, const Error& e) const;

    template <class F>
    void read(httplib::Response& res, F&& body);
    template <class F>
    void write(httplib::Response& res, F&& body);

    CommitId resolve(const std::string& text) const;
    static Json parse_body(const httplib::Request& req);

    Session& session_;
    ApiOptions options_;
    std::unique_ptr<httplib::Server> server_;

    mutable std::shared_mutex state_mutex_;
    mutable std::mutex event_mutex_;
    std::condition_variable events_;
    std::uint64_t revision_ = 0;
};

}  // namespace statevc
