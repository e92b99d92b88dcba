#include "moleda/service/session.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "moleda/error.hpp"

namespace moleda::service {

namespace {

const std::map<std::string, Interaction::Type> kTypes = {
    {"add_control", Interaction::Type::AddControl}, {"move_control", Interaction::Type::MoveControl},
    {"remove_control", Interaction::Type::RemoveControl}, {"add_link", Interaction::Type::AddLink},
    {"remove_link", Interaction::Type::RemoveLink}, {"set_strength", Interaction::Type::SetStrength}};

[[noreturn]] void bad(const std::string& message) { throw InvalidArgument("invalid_message", message); }

std::size_t index_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 0) {
        bad(std::string(key) + " must be a non-negative integer");
    }
    return j[key].get<std::size_t>();
}

double real_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) bad(std::string(key) + " must be a number");
    return j[key].get<double>();
}

Interaction::Target target_field(const json& j, const char* key) {
    const std::string t = j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : "";
    if (t == "control") return Interaction::Target::Control;
    if (t == "must") return Interaction::Target::Must;
    if (t == "cannot") return Interaction::Target::Cannot;
    bad(std::string(key) + " must be one of " + (std::string(key) == "kind" ? "must, cannot" : "control, must, cannot"));
}

const char* target_name(Interaction::Target t) {
    switch (t) {
        case Interaction::Target::Control: return "control";
        case Interaction::Target::Must: return "must";
        case Interaction::Target::Cannot: return "cannot";
    }
    return "must";
}

bool same_pair(const embed::Link& l, std::size_t i, std::size_t j) {
    return (l.i == i && l.j == j) || (l.i == j && l.j == i);
}

bool is_topology(const Interaction& m) { return m.type != Interaction::Type::MoveControl; }

}  // namespace

Interaction interaction_from_json(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) bad("messages need a string type");
    const auto it = kTypes.find(j["type"].get<std::string>());
    if (it == kTypes.end()) bad("unknown message type '" + j["type"].get<std::string>() + "'");
    Interaction m;
    m.type = it->second;
    switch (m.type) {
        case Interaction::Type::AddControl:
        case Interaction::Type::MoveControl:
            m.index = index_field(j, "index");
            m.x = real_field(j, "x");
            m.y = real_field(j, "y");
            break;
        case Interaction::Type::RemoveControl:
            m.index = index_field(j, "index");
            break;
        case Interaction::Type::AddLink:
        case Interaction::Type::RemoveLink:
            m.kind = target_field(j, "kind");
            if (m.kind == Interaction::Target::Control) bad("kind must be one of must, cannot");
            m.i = index_field(j, "i");
            m.j = index_field(j, "j");
            break;
        case Interaction::Type::SetStrength:
            m.kind = target_field(j, "target");
            m.value = real_field(j, "value");
            break;
    }
    return m;
}

json to_json(const Interaction& m) {
    std::string type;
    for (const auto& [name, t] : kTypes) {
        if (t == m.type) type = name;
    }
    json j = {{"type", type}};
    switch (m.type) {
        case Interaction::Type::AddControl:
        case Interaction::Type::MoveControl:
            j["index"] = m.index;
            j["x"] = m.x;
            j["y"] = m.y;
            break;
        case Interaction::Type::RemoveControl: j["index"] = m.index; break;
        case Interaction::Type::AddLink:
        case Interaction::Type::RemoveLink:
            j["kind"] = target_name(m.kind);
            j["i"] = m.i;
            j["j"] = m.j;
            break;
        case Interaction::Type::SetStrength:
            j["target"] = target_name(m.kind);
            j["value"] = m.value;
            break;
    }
    return j;
}

embed::Embedding apply_interaction(embed::CkpcaState& state, const Interaction& m) {
    if (m.type == Interaction::Type::MoveControl) return state.move_control(m.index, m.x, m.y);

    embed::ConstraintSet c = state.constraints();
    auto& links = m.kind == Interaction::Target::Must ? c.must_links : c.cannot_links;
    switch (m.type) {
        case Interaction::Type::AddControl: {
            auto it = std::find_if(c.control_points.begin(), c.control_points.end(),
                                   [&](const embed::ControlPoint& cp) { return cp.index == m.index; });
            if (it != c.control_points.end()) {
                it->x = m.x;
                it->y = m.y;
            } else {
                c.control_points.push_back({m.index, m.x, m.y});
            }
            break;
        }
        case Interaction::Type::RemoveControl: {
            const auto before = c.control_points.size();
            std::erase_if(c.control_points, [&](const embed::ControlPoint& cp) { return cp.index == m.index; });
            if (c.control_points.size() == before) {
                throw InvalidArgument("unknown_control", "point " + std::to_string(m.index) + " is not a control point");
            }
            break;
        }
        case Interaction::Type::AddLink:
            if (std::none_of(links.begin(), links.end(), [&](const embed::Link& l) { return same_pair(l, m.i, m.j); })) {
                links.push_back({m.i, m.j});
            }
            break;
        case Interaction::Type::RemoveLink: {
            const auto before = links.size();
            std::erase_if(links, [&](const embed::Link& l) { return same_pair(l, m.i, m.j); });
            if (links.size() == before) throw InvalidArgument("unknown_link", "no such link");
            break;
        }
        case Interaction::Type::SetStrength:
            if (!(m.value >= 0.0) || !std::isfinite(m.value)) {
                throw InvalidArgument("invalid_strength", "strengths must be finite and non-negative");
            }
            (m.kind == Interaction::Target::Control ? c.mu_cp : m.kind == Interaction::Target::Must ? c.mu_ml : c.mu_cl) =
                m.value;
            break;
        case Interaction::Type::MoveControl: break;
    }
    embed::CkpcaState trial = state;
    trial.set_constraints(std::move(c));
    embed::Embedding e = trial.solve();
    state = std::move(trial);
    return e;
}

void Mailbox::push(const Interaction& m) {
    if (m.type == Interaction::Type::MoveControl) {
        for (auto it = queue_.rbegin(); it != queue_.rend(); ++it) {
            if (is_topology(*it)) break;
            if (it->index == m.index) {
                it->x = m.x;
                it->y = m.y;
                return;
            }
        }
    }
    queue_.push_back(m);
}

std::optional<Interaction> Mailbox::pop() {
    if (queue_.empty()) return std::nullopt;
    Interaction m = queue_.front();
    queue_.pop_front();
    return m;
}

Session::Session(std::string id, std::string collection, std::vector<docstore::Document> docs, Executor executor)
    : id_(std::move(id)),
      collection_(std::move(collection)),
      docs_(std::move(docs)),
      executor_(std::move(executor)),
      created_(Clock::now()),
      last_active_(created_) {}

json Session::info() const {
    std::lock_guard lock(solve_mutex_);
    json j = {{"session_id", id_},
              {"collection", collection_},
              {"count", docs_.size()},
              {"fingerprints", fps_ ? fingerprint_stats_json(*fps_) : json(nullptr)},
              {"embedding_version", last_event_ ? json(version_) : json(nullptr)},
              {"clustered", clustering_.has_value()}};
    j["ids"] = json::array();
    for (const auto& d : docs_) j["ids"].push_back(d.id);
    return j;
}

void Session::require_fingerprints() const {
    if (!fps_) throw Conflict("fingerprints_missing", "compute fingerprints before clustering or embedding");
}

json Session::fingerprint(const json& body) {
    const FingerprintRequest req = fingerprint_request_from_json(body);
    FingerprintSet set = fingerprint_documents(docs_, req);
    Eigen::MatrixXd x = dense_bits(set);
    std::lock_guard lock(solve_mutex_);
    fps_ = std::move(set);
    vectors_ = std::move(x);
    return fingerprint_stats_json(*fps_);
}

json Session::cluster(const json& body) {
    const ClusterRequest req = cluster_request_from_json(body);
    std::lock_guard lock(solve_mutex_);
    require_fingerprints();
    ClusterResult r = run_cluster(vectors_, req);
    json out = to_json(r, req);
    clustering_ = std::move(r);
    return out;
}

json Session::embed(const json& body) {
    const EmbedRequest req = embed_request_from_json(body);
    std::lock_guard lock(solve_mutex_);
    require_fingerprints();
    EmbedResult r = run_embed(vectors_, req);
    state_ = std::move(r.state);
    json out = publish(std::move(r.embedding));
    out.erase("type");
    out["quality"] = r.quality ? to_json(*r.quality) : json(nullptr);
    return out;
}

json Session::embedding() const {
    std::lock_guard lock(solve_mutex_);
    if (!last_event_) throw Conflict("no_embedding", "the session has no embedding yet");
    return *last_event_;
}

json Session::search(const std::string& q) const {
    json hits = json::array();
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        const auto& d = docs_[i];
        if (q.empty()) break;
        if (d.smiles().find(q) != std::string::npos || d.id.find(q) != std::string::npos) {
            hits.push_back({{"index", i}, {"id", d.id}, {"smiles", d.smiles()}});
        }
    }
    return {{"query", q}, {"matches", hits}};
}

json Session::publish(embed::Embedding e) {
    e.version = ++version_;
    json event = to_json(e);
    event["type"] = "embedding";
    event["constraints"] = state_ ? to_json(state_->constraints()) : json(nullptr);
    last_event_ = event;
    emit(event);
    return event;
}

void Session::post(const Interaction& m) {
    bool start = false;
    {
        std::lock_guard lock(mailbox_mutex_);
        last_active_ = Clock::now();
        mailbox_.push(m);
        if (!worker_active_) worker_active_ = start = true;
    }
    if (start) {
        executor_([self = shared_from_this()] { self->drain(); });
    }
}

void Session::drain() {
    for (;;) {
        std::optional<Interaction> m;
        {
            std::lock_guard lock(mailbox_mutex_);
            m = mailbox_.pop();
            if (!m) {
                worker_active_ = false;
                idle_cv_.notify_all();
                return;
            }
        }
        std::lock_guard lock(solve_mutex_);
        if (!state_) {
            emit({{"type", "error"}, {"code", "not_ckpca"}, {"message", "interactions need an active ckpca embedding"}});
            continue;
        }
        try {
            publish(apply_interaction(*state_, *m));
        } catch (const Error& e) {
            emit({{"type", "error"}, {"code", e.code()}, {"message", e.what()}, {"request", to_json(*m)}});
        }
    }
}

void Session::emit_error(const std::string& code, const std::string& message) {
    emit({{"type", "error"}, {"code", code}, {"message", message}});
}

void Session::emit(const json& event) {
    std::lock_guard lock(sink_mutex_);
    for (const auto& [token, sink] : sinks_) sink(event);
}

std::uint64_t Session::subscribe(EventSink sink) {
    std::lock_guard lock(sink_mutex_);
    sinks_.emplace(next_token_, std::move(sink));
    return next_token_++;
}

void Session::unsubscribe(std::uint64_t token) {
    std::lock_guard lock(sink_mutex_);
    sinks_.erase(token);
}

void Session::touch() {
    std::lock_guard lock(mailbox_mutex_);
    last_active_ = Clock::now();
}

Session::Clock::time_point Session::last_active() const {
    std::lock_guard lock(mailbox_mutex_);
    return last_active_;
}

void Session::wait_idle() {
    std::unique_lock lock(mailbox_mutex_);
    idle_cv_.wait(lock, [&] { return !worker_active_ && mailbox_.empty(); });
}

SessionManager::SessionManager(Executor executor, std::chrono::minutes idle_ttl)
    : executor_(std::move(executor)), ttl_(idle_ttl) {}

std::shared_ptr<Session> SessionManager::create(std::string collection, std::vector<docstore::Document> docs) {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::lock_guard lock(mutex_);
    std::string id;
    do {
        char buf[33];
        std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                      static_cast<unsigned long long>(rng()));
        id = buf;
    } while (sessions_.count(id));
    auto s = std::make_shared<Session>(id, std::move(collection), std::move(docs), executor_);
    sessions_.emplace(id, s);
    return s;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown_session", "no session '" + id + "'");
    it->second->touch();
    return it->second;
}

bool SessionManager::remove(const std::string& id) {
    std::lock_guard lock(mutex_);
    return sessions_.erase(id) > 0;
}

std::size_t SessionManager::evict_idle(Session::Clock::time_point now) {
    std::lock_guard lock(mutex_);
    return std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->last_active() > ttl_; });
}

std::size_t SessionManager::count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

}  // namespace moleda::service
