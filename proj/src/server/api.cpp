#include <spdlog/spdlog.h>

#include <set>

#include "moleda/docstore/json.hpp"
#include "moleda/error.hpp"
#include "moleda/server/server.hpp"

namespace moleda::server {

using nlohmann::json;

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::size_t start = 1;
    while (start <= path.size()) {
        const auto end = path.find('/', start);
        const std::string part = path.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!part.empty()) out.push_back(url_decode(part));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

std::string query_param(const std::string& query, const std::string& key) {
    std::size_t start = 0;
    while (start <= query.size()) {
        const auto end = query.find('&', start);
        const std::string pair = query.substr(start, end == std::string::npos ? std::string::npos : end - start);
        const auto eq = pair.find('=');
        if (url_decode(pair.substr(0, eq)) == key) return eq == std::string::npos ? "" : url_decode(pair.substr(eq + 1));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return "";
}

std::vector<std::string> string_list(const json& body, const char* key) {
    std::vector<std::string> out;
    if (!body.contains(key) || body[key].is_null()) return out;
    if (!body[key].is_array()) throw InvalidArgument("invalid_fields", std::string(key) + " must be an array of names");
    for (const auto& f : body[key]) {
        if (!f.is_string()) throw InvalidArgument("invalid_fields", std::string(key) + " must be an array of names");
        out.push_back(f.get<std::string>());
    }
    return out;
}

docstore::Filter filter_of(const json& body) {
    return docstore::filter_from_json(body.contains("filter") ? body["filter"] : json(nullptr));
}

/// "limit": n | "all" | {...}, or "sample": n with an optional "seed".
docstore::Limit limit_of(const json& body) {
    if (body.contains("sample") && !body["sample"].is_null()) {
        json spec = {{"sample", body["sample"]}};
        if (body.contains("seed")) spec["seed"] = body["seed"];
        return docstore::limit_from_json(spec);
    }
    return docstore::limit_from_json(body.contains("limit") ? body["limit"] : json(nullptr));
}

json error_body(const std::string& code, const std::string& message) { return {{"code", code}, {"message", message}}; }

}  // namespace

std::string url_decode(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out += ' ';
        } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
                   std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

Api::Api(docstore::Store& store, service::SessionManager& sessions) : store_(store), sessions_(sessions) {}

Response Api::handle(const std::string& method, const std::string& target, const std::string& body) const {
    const auto q = target.find('?');
    const std::string path = target.substr(0, q);
    const std::string query = q == std::string::npos ? "" : target.substr(q + 1);
    try {
        json parsed = json::object();
        if (!body.empty()) {
            try {
                parsed = json::parse(body);
            } catch (const json::exception& e) {
                return {400, error_body("invalid_json", e.what())};
            }
            if (!parsed.is_object()) return {400, error_body("invalid_json", "request bodies must be JSON objects")};
        }
        return dispatch(method, split_path(path), query, parsed);
    } catch (const InvalidArgument& e) {
        return {422, error_body(e.code(), e.what())};
    } catch (const NotFound& e) {
        return {404, error_body(e.code(), e.what())};
    } catch (const Conflict& e) {
        return {409, error_body(e.code(), e.what())};
    } catch (const NumericalError& e) {
        return {422, error_body(e.code(), e.what())};
    } catch (const Error& e) {
        spdlog::error("{} {}: {}", method, target, e.what());
        return {500, error_body(e.code(), e.what())};
    } catch (const std::exception& e) {
        spdlog::error("{} {}: {}", method, target, e.what());
        return {500, error_body("internal_error", e.what())};
    }
}

Response Api::dispatch(const std::string& method, const std::vector<std::string>& p, const std::string& query,
                       const json& body) const {
    const auto route = [&](const std::string& m, std::initializer_list<const char*> shape) {
        if (p.size() != shape.size()) return false;
        std::size_t i = 0;
        for (const char* s : shape) {
            if (std::string(s) != "*" && p[i] != s) return false;
            ++i;
        }
        return method == m;
    };
    const bool known_path = [&] {
        if (p.empty() || p.size() > 3 || (p[0] != "collections" && p[0] != "sessions")) return false;
        if (p.size() < 3) return true;
        static const std::set<std::string> tails = {"fields", "summary", "fetch", "fingerprint", "cluster", "embed",
                                                    "embedding", "search"};
        return tails.count(p[2]) > 0;
    }();

    if (route("GET", {"collections"})) {
        json list = json::array();
        for (const auto& c : store_.collections()) list.push_back({{"name", c.name}, {"size", c.size}});
        return {200, {{"collections", list}}};
    }
    if (route("GET", {"collections", "*", "fields"})) {
        return {200, {{"collection", p[1]}, {"size", store_.size(p[1])}, {"fields", store_.field_types(p[1])}}};
    }
    if (route("POST", {"collections", "*", "summary"})) {
        docstore::SummaryOptions opts;
        const json o = body.contains("opts") ? body["opts"] : json::object();
        if (o.contains("bins") && !o["bins"].is_null() && o["bins"] != "auto") {
            if (!o["bins"].is_number_integer() || o["bins"].get<long long>() < 0) {
                throw InvalidArgument("invalid_bins", "bins must be \"auto\" or a positive integer");
            }
            opts.bins = o["bins"].get<std::size_t>();
        }
        if (o.contains("group_by") && !o["group_by"].is_null()) {
            if (!o["group_by"].is_string()) throw InvalidArgument("invalid_group_by", "group_by must be a field name");
            opts.group_by = o["group_by"].get<std::string>();
        }
        json out = json::array();
        for (const auto& s : store_.summarize(p[1], string_list(body, "fields"), filter_of(body), opts)) {
            out.push_back(docstore::to_json(s));
        }
        return {200, {{"collection", p[1]}, {"std_kind", "population"}, {"summaries", out}}};
    }
    if (route("POST", {"collections", "*", "fetch"})) {
        json docs = json::array();
        for (const auto& d : store_.fetch(p[1], filter_of(body), string_list(body, "fields"), limit_of(body))) {
            docs.push_back(docstore::to_json(d));
        }
        const std::size_t n = docs.size();
        return {200, {{"collection", p[1]}, {"count", n}, {"documents", std::move(docs)}}};
    }
    if (route("POST", {"sessions"})) {
        if (!body.contains("collection") || !body["collection"].is_string()) {
            throw InvalidArgument("invalid_params", "collection is required");
        }
        const std::string c = body["collection"].get<std::string>();
        auto docs = store_.fetch(c, filter_of(body), {}, limit_of(body));
        const std::size_t n = docs.size();
        auto s = sessions_.create(c, std::move(docs));
        spdlog::info("session {} created on '{}' with {} molecules", s->id(), c, n);
        return {201, {{"session_id", s->id()}, {"count", n}}};
    }
    if (route("GET", {"sessions", "*"})) return {200, sessions_.get(p[1])->info()};
    if (route("DELETE", {"sessions", "*"})) {
        if (!sessions_.remove(p[1])) throw NotFound("unknown_session", "no session '" + p[1] + "'");
        return {200, {{"deleted", p[1]}}};
    }
    if (route("POST", {"sessions", "*", "fingerprint"})) return {200, sessions_.get(p[1])->fingerprint(body)};
    if (route("POST", {"sessions", "*", "cluster"})) return {200, sessions_.get(p[1])->cluster(body)};
    if (route("POST", {"sessions", "*", "embed"})) return {200, sessions_.get(p[1])->embed(body)};
    if (route("GET", {"sessions", "*", "embedding"})) return {200, sessions_.get(p[1])->embedding()};
    if (route("GET", {"sessions", "*", "search"})) return {200, sessions_.get(p[1])->search(query_param(query, "q"))};

    if (known_path) return {405, error_body("method_not_allowed", method + " is not supported here")};
    return {404, error_body("unknown_route", "no such endpoint")};
}

}  // namespace moleda::server
