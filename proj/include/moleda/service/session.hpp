#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "moleda/docstore/document.hpp"
#include "moleda/embed/ckpca.hpp"
#include "moleda/service/pipeline.hpp"

namespace moleda::service {

struct Interaction {
    enum class Type { AddControl, MoveControl, RemoveControl, AddLink, RemoveLink, SetStrength };
    enum class Target { Control, Must, Cannot };

    Type type = Type::MoveControl;
    std::size_t index = 0;
    double x = 0.0;
    double y = 0.0;
    Target kind = Target::Must;  // links and set_strength
    std::size_t i = 0;
    std::size_t j = 0;
    double value = 0.0;
};

/// {type: add_control|move_control|remove_control|add_link|remove_link|set_strength, ...}.
/// Throws InvalidArgument("invalid_message").
Interaction interaction_from_json(const json& j);
json to_json(const Interaction& m);

/// Applies one message to a cKPCA state; move_control reuses the factorisation,
/// everything else refactors. Throws (leaving the state unchanged) on invalid input.
embed::Embedding apply_interaction(embed::CkpcaState& state, const Interaction& m);

/// FIFO of pending interactions where a move_control replaces the pending move
/// of the same index unless a topology change is queued after it.
class Mailbox {
public:
    void push(const Interaction& m);
    std::optional<Interaction> pop();
    bool empty() const noexcept { return queue_.empty(); }
    std::size_t size() const noexcept { return queue_.size(); }

private:
    std::deque<Interaction> queue_;
};

/// Runs a task somewhere else (a thread pool in the server, inline in tests).
using Executor = std::function<void(std::function<void()>)>;
using EventSink = std::function<void(const json&)>;

/// A fetched working set with its fingerprints, clustering and embedding.
/// Solves are serialised per session; interactions are drained by a single
/// worker at a time, and every solve is pushed to all subscribers.
class Session : public std::enable_shared_from_this<Session> {
public:
    using Clock = std::chrono::steady_clock;

    Session(std::string id, std::string collection, std::vector<docstore::Document> docs, Executor executor);

    const std::string& id() const noexcept { return id_; }
    std::size_t size() const noexcept { return docs_.size(); }
    const std::vector<docstore::Document>& documents() const noexcept { return docs_; }

    json info() const;
    json fingerprint(const json& body);
    json cluster(const json& body);
    /// {method, version, coords, provenance, quality, constraints?}; also emitted to subscribers.
    json embed(const json& body);
    /// The last emitted embedding event; throws Conflict("no_embedding") before any embed.
    json embedding() const;
    json search(const std::string& q) const;

    /// Queues an interaction for the solver worker.
    void post(const Interaction& m);
    /// Reports an error event to subscribers, e.g. for an undecodable message.
    void emit_error(const std::string& code, const std::string& message);

    std::uint64_t subscribe(EventSink sink);
    void unsubscribe(std::uint64_t token);

    void touch();
    Clock::time_point last_active() const;

    /// Blocks until the mailbox is empty and no solve is running.
    void wait_idle();

private:
    void drain();
    json publish(embed::Embedding e);
    void emit(const json& event);
    void require_fingerprints() const;

    std::string id_;
    std::string collection_;
    std::vector<docstore::Document> docs_;
    Executor executor_;
    Clock::time_point created_;

    mutable std::mutex solve_mutex_;  // state below
    std::optional<FingerprintSet> fps_;
    Eigen::MatrixXd vectors_;
    std::optional<ClusterResult> clustering_;
    std::optional<embed::CkpcaState> state_;
    std::optional<json> last_event_;
    std::uint64_t version_ = 0;

    mutable std::mutex mailbox_mutex_;  // mailbox, worker flag, last activity
    std::condition_variable idle_cv_;
    Mailbox mailbox_;
    bool worker_active_ = false;
    Clock::time_point last_active_;

    mutable std::mutex sink_mutex_;
    std::map<std::uint64_t, EventSink> sinks_;
    std::uint64_t next_token_ = 1;
};

class SessionManager {
public:
    explicit SessionManager(Executor executor, std::chrono::minutes idle_ttl = std::chrono::minutes(60));

    std::shared_ptr<Session> create(std::string collection, std::vector<docstore::Document> docs);
    /// Throws NotFound("unknown_session").
    std::shared_ptr<Session> get(const std::string& id) const;
    bool remove(const std::string& id);
    /// Drops sessions idle for longer than the TTL; returns how many.
    std::size_t evict_idle(Session::Clock::time_point now);
    std::size_t count() const;
    std::chrono::minutes idle_ttl() const noexcept { return ttl_; }

private:
    Executor executor_;
    std::chrono::minutes ttl_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace moleda::service
