#include "moleda/server/server.hpp"

#include <spdlog/spdlog.h>

#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <charconv>
#include <deque>
#include <thread>

#include "moleda/error.hpp"

namespace moleda::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;

void parse_bind(const std::string& bind, ServerConfig& cfg) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos || colon == 0) throw InvalidArgument("invalid_bind", "bind must be host:port");
    unsigned port = 0;
    const char* first = bind.data() + colon + 1;
    const char* last = bind.data() + bind.size();
    const auto [ptr, ec] = std::from_chars(first, last, port);
    if (ec != std::errc{} || ptr != last || port > 65535) throw InvalidArgument("invalid_bind", "invalid port in '" + bind + "'");
    std::string host = bind.substr(0, colon);
    if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
    boost::system::error_code bad;
    net::ip::make_address(host, bad);
    if (bad && host != "localhost") throw InvalidArgument("invalid_bind", "invalid host in '" + bind + "'");
    cfg.host = host == "localhost" ? "127.0.0.1" : host;
    cfg.port = static_cast<unsigned short>(port);
}

namespace {

/// One WebSocket subscriber: inbound messages go to the session's mailbox,
/// events are written in order from a per-connection queue.
class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(tcp::socket&& socket, std::shared_ptr<service::Session> session)
        : ws_(std::move(socket)), session_(std::move(session)) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<WsConnection> weak = shared_from_this();
        token_ = session_->subscribe([weak](const json& event) {
            if (auto self = weak.lock()) self->send(event.dump());
        });
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            session_->unsubscribe(token_);
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        try {
            json j;
            try {
                j = json::parse(text);
            } catch (const json::exception& e) {
                throw InvalidArgument("invalid_message", e.what());
            }
            session_->post(service::interaction_from_json(j));
        } catch (const Error& e) {
            send(json{{"type", "error"}, {"code", e.code()}, {"message", e.what()}}.dump());
        }
        do_read();
    }

    void send(std::string text) {
        net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
            self->queue_.push_back(std::move(text));
            if (self->queue_.size() == 1) self->do_write();
        });
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(net::buffer(queue_.front()), beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            queue_.clear();
            return;
        }
        queue_.pop_front();
        if (!queue_.empty()) do_write();
    }

    websocket::stream<beast::tcp_stream> ws_;
    std::shared_ptr<service::Session> session_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    std::uint64_t token_ = 0;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket&& socket, const Api& api, service::SessionManager& sessions)
        : stream_(std::move(socket)), api_(api), sessions_(sessions) {}

    void run() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpConnection::do_read, shared_from_this()));
    }

private:
    void do_read() {
        parser_.emplace();
        parser_->body_limit(256 * 1024 * 1024);
        stream_.expires_after(std::chrono::minutes(5));
        http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec == http::error::end_of_stream) return close();
        if (ec) return;
        http::request<http::string_body> req = parser_->release();
        const std::string target(req.target());

        if (websocket::is_upgrade(req)) {
            const auto parts = target.substr(0, target.find('?'));
            const std::string prefix = "/sessions/", suffix = "/interact";
            if (parts.size() > prefix.size() + suffix.size() && parts.rfind(prefix, 0) == 0 &&
                parts.compare(parts.size() - suffix.size(), suffix.size(), suffix) == 0) {
                const std::string id = url_decode(parts.substr(prefix.size(), parts.size() - prefix.size() - suffix.size()));
                try {
                    auto session = sessions_.get(id);
                    stream_.expires_never();
                    std::make_shared<WsConnection>(stream_.release_socket(), std::move(session))->run(std::move(req));
                    return;
                } catch (const NotFound& e) {
                    return write(req, {404, {{"code", e.code()}, {"message", e.what()}}});
                }
            }
            return write(req, {404, {{"code", "unknown_route"}, {"message", "websockets live at /sessions/{id}/interact"}}});
        }

        if (req.method() == http::verb::options) return write(req, {204, nullptr});
        const auto started = std::chrono::steady_clock::now();
        Response r = api_.handle(std::string(req.method_string()), target, req.body());
        spdlog::debug("{} {} -> {} ({} ms)", std::string(req.method_string()), target, r.status,
                      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count());
        write(req, std::move(r));
    }

    void write(const http::request<http::string_body>& req, Response r) {
        auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status), req.version());
        res->set(http::field::server, "moleda");
        res->set(http::field::access_control_allow_origin, "*");
        res->set(http::field::access_control_allow_methods, "GET, POST, DELETE, OPTIONS");
        res->set(http::field::access_control_allow_headers, "Content-Type");
        if (r.status != 204) {
            res->set(http::field::content_type, "application/json");
            res->body() = r.body.dump();
        }
        res->keep_alive(req.keep_alive());
        res->prepare_payload();
        http::async_write(stream_, *res,
                          [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                              if (ec) return;
                              if (!res->keep_alive()) return self->close();
                              self->do_read();
                          });
    }

    void close() {
        beast::error_code ec;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    std::optional<http::request_parser<http::string_body>> parser_;
    const Api& api_;
    service::SessionManager& sessions_;
};

}  // namespace

struct Server::Impl {
    Impl(docstore::Store& store, ServerConfig c)
        : cfg(std::move(c)),
          solvers(static_cast<std::size_t>(std::max(1, cfg.solver_threads))),
          sessions([this](std::function<void()> task) { net::post(solvers, std::move(task)); }, cfg.session_ttl),
          api(store, sessions),
          ioc(std::max(1, cfg.io_threads)),
          acceptor(net::make_strand(ioc)),
          sweeper(ioc) {}

    void accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != net::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
                if (!acceptor.is_open()) return;
            } else {
                std::make_shared<HttpConnection>(std::move(socket), api, sessions)->run();
            }
            accept();
        });
    }

    void sweep() {
        sweeper.expires_after(cfg.sweep_interval);
        sweeper.async_wait([this](beast::error_code ec) {
            if (ec) return;
            if (const auto n = sessions.evict_idle(service::Session::Clock::now())) spdlog::info("evicted {} idle sessions", n);
            sweep();
        });
    }

    ServerConfig cfg;
    net::thread_pool solvers;
    service::SessionManager sessions;
    Api api;
    net::io_context ioc;
    tcp::acceptor acceptor;
    net::steady_timer sweeper;
    std::vector<std::thread> threads;
    std::mutex stop_mutex;
    std::condition_variable stopped_cv;
    bool stopped = false;
};

Server::Server(docstore::Store& store, ServerConfig cfg) : impl_(std::make_unique<Impl>(store, std::move(cfg))) {}

Server::~Server() { stop(); }

unsigned short Server::start() {
    auto& im = *impl_;
    beast::error_code ec;
    const tcp::endpoint endpoint(net::ip::make_address(im.cfg.host, ec), im.cfg.port);
    if (ec) throw InvalidArgument("invalid_bind", "invalid host '" + im.cfg.host + "'");
    im.acceptor.open(endpoint.protocol(), ec);
    if (!ec) im.acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) im.acceptor.bind(endpoint, ec);
    if (!ec) im.acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error("bind_failed", "cannot listen on " + im.cfg.host + ":" + std::to_string(im.cfg.port) + ": " + ec.message());
    const unsigned short port = im.acceptor.local_endpoint().port();
    im.accept();
    im.sweep();
    for (int i = 0; i < std::max(1, im.cfg.io_threads); ++i) im.threads.emplace_back([&im] { im.ioc.run(); });
    spdlog::info("listening on {}:{}", im.cfg.host, port);
    return port;
}

void Server::wait() {
    std::unique_lock lock(impl_->stop_mutex);
    impl_->stopped_cv.wait(lock, [&] { return impl_->stopped; });
}

void Server::stop() {
    auto& im = *impl_;
    {
        std::lock_guard lock(im.stop_mutex);
        if (im.stopped) return;
        im.stopped = true;
    }
    net::post(im.ioc, [&im] {
        beast::error_code ec;
        im.acceptor.close(ec);
        im.sweeper.cancel();
    });
    im.ioc.stop();
    for (auto& t : im.threads) {
        if (t.joinable()) t.join();
    }
    im.solvers.join();
    im.stopped_cv.notify_all();
}

service::SessionManager& Server::sessions() { return impl_->sessions; }

}  // namespace moleda::server
