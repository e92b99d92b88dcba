#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <json.hpp>

#include "moleda/docstore/store.hpp"
#include "moleda/service/session.hpp"

namespace moleda::server {

struct ServerConfig {
    std::string host = "127.0.0.1";
    unsigned short port = 8080;  // 0 picks a free port
    int io_threads = 4;
    int solver_threads = 2;
    std::chrono::minutes session_ttl{60};
    std::chrono::seconds sweep_interval{60};
};

/// "host:port"; throws InvalidArgument("invalid_bind").
void parse_bind(const std::string& bind, ServerConfig& cfg);

struct Response {
    unsigned status = 200;
    nlohmann::json body;
};

/// REST routing without any networking; errors become {code, message} bodies
/// (422 invalid input, 404 unknown resource, 409 wrong state).
class Api {
public:
    Api(docstore::Store& store, service::SessionManager& sessions);

    Response handle(const std::string& method, const std::string& target, const std::string& body) const;

private:
    Response dispatch(const std::string& method, const std::vector<std::string>& path, const std::string& query,
                      const nlohmann::json& body) const;

    docstore::Store& store_;
    service::SessionManager& sessions_;
};

/// HTTP + WebSocket front end. Interactions arrive on /sessions/{id}/interact.
class Server {
public:
    Server(docstore::Store& store, ServerConfig cfg);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts the worker threads; returns the bound port.
    unsigned short start();
    /// Blocks until stop() is called.
    void wait();
    void stop();

    service::SessionManager& sessions();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Percent-decoding of a URL component ('+' becomes a space).
std::string url_decode(const std::string& s);

}  // namespace moleda::server
