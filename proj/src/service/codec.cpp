#include "moleda/service/codec.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "moleda/error.hpp"

namespace moleda::service {

namespace {

json links_json(const std::vector<embed::Link>& links) {
    json out = json::array();
    for (const auto& l : links) out.push_back({l.i, l.j});
    return out;
}

std::size_t index_of(const json& j, const std::string& what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw InvalidArgument("invalid_constraint", what + " must be a non-negative integer");
    }
    return j.get<std::size_t>();
}

double real_of(const json& j, const std::string& what) {
    if (!j.is_number()) throw InvalidArgument("invalid_constraint", what + " must be a number");
    return j.get<double>();
}

std::vector<embed::Link> links_from_json(const json& j, const char* key) {
    std::vector<embed::Link> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array()) throw InvalidArgument("invalid_constraint", std::string(key) + " must be an array");
    for (const auto& pair : j[key]) {
        if (!pair.is_array() || pair.size() != 2) {
            throw InvalidArgument("invalid_constraint", std::string(key) + " entries must be [i, j] pairs");
        }
        out.push_back({index_of(pair[0], key), index_of(pair[1], key)});
    }
    return out;
}

}  // namespace

json to_json(const embed::ConstraintSet& c) {
    json cps = json::array();
    for (const auto& cp : c.control_points) cps.push_back({{"index", cp.index}, {"x", cp.x}, {"y", cp.y}});
    return {{"control_points", cps},
            {"must_links", links_json(c.must_links)},
            {"cannot_links", links_json(c.cannot_links)},
            {"mu_cp", c.mu_cp},
            {"mu_ml", c.mu_ml},
            {"mu_cl", c.mu_cl},
            {"lambda", c.lambda}};
}

embed::ConstraintSet constraints_from_json(const json& j) {
    embed::ConstraintSet c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw InvalidArgument("invalid_constraint", "constraints must be a JSON object");
    static const std::set<std::string> known = {"control_points", "must_links", "cannot_links", "mu_cp",
                                                "mu_ml",          "mu_cl",      "lambda"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw InvalidArgument("invalid_constraint", "unknown key '" + it.key() + "'");
    }
    if (j.contains("control_points")) {
        if (!j["control_points"].is_array()) throw InvalidArgument("invalid_constraint", "control_points must be an array");
        for (const auto& cp : j["control_points"]) {
            if (!cp.is_object() || !cp.contains("index") || !cp.contains("x") || !cp.contains("y")) {
                throw InvalidArgument("invalid_constraint", "control points need index, x and y");
            }
            c.control_points.push_back({index_of(cp["index"], "index"), real_of(cp["x"], "x"), real_of(cp["y"], "y")});
        }
    }
    c.must_links = links_from_json(j, "must_links");
    c.cannot_links = links_from_json(j, "cannot_links");
    if (j.contains("mu_cp")) c.mu_cp = real_of(j["mu_cp"], "mu_cp");
    if (j.contains("mu_ml")) c.mu_ml = real_of(j["mu_ml"], "mu_ml");
    if (j.contains("mu_cl")) c.mu_cl = real_of(j["mu_cl"], "mu_cl");
    if (j.contains("lambda")) c.lambda = real_of(j["lambda"], "lambda");
    return c;
}

json to_json(const quality::QualityReport& q) {
    return {{"trustworthiness", q.trustworthiness},
            {"knn_preservation", q.knn_preservation},
            {"shepard_spearman", q.shepard_spearman},
            {"normalized_stress", q.normalized_stress},
            {"k", q.k_used}};
}

json to_json(const cluster::ValidityReport& v) {
    return {{"silhouette", v.silhouette}, {"calinski_harabasz", v.calinski_harabasz}, {"davies_bouldin", v.davies_bouldin}};
}

json coords_json(const embed::Coords& coords) {
    json out = json::array();
    for (Eigen::Index i = 0; i < coords.rows(); ++i) out.push_back({coords(i, 0), coords(i, 1)});
    return out;
}

json to_json(const embed::Embedding& e) {
    return {{"method", embed::method_name(e.method)},
            {"version", e.version},
            {"coords", coords_json(e.coords)},
            {"provenance", e.provenance}};
}

void write_coords_csv(std::ostream& out, const std::vector<std::string>& ids, const embed::Coords& coords) {
    out << "id,x,y\n";
    char buf[64];
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
        const std::string& id = ids[static_cast<std::size_t>(i)];
        if (id.find_first_of(",\"\n\r") != std::string::npos) {
            out << '"';
            for (char ch : id) out << (ch == '"' ? "\"\"" : std::string(1, ch));
            out << '"';
        } else {
            out << id;
        }
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", coords(i, 0), coords(i, 1));
        out << buf;
    }
}

json read_json_file(const std::string& path, const std::string& code) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("file_not_found", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument(code, "'" + path + "' is not valid JSON: " + e.what());
    }
}

double number_or(const json& j, const char* key, double fallback, const std::string& code) {
    if (!j.is_object() || !j.contains(key) || j[key].is_null()) return fallback;
    if (!j[key].is_number()) throw InvalidArgument(code, std::string(key) + " must be a number");
    return j[key].get<double>();
}

long long integer_or(const json& j, const char* key, long long fallback, const std::string& code) {
    if (!j.is_object() || !j.contains(key) || j[key].is_null()) return fallback;
    if (!j[key].is_number_integer()) throw InvalidArgument(code, std::string(key) + " must be an integer");
    return j[key].get<long long>();
}

std::string string_or(const json& j, const char* key, const std::string& fallback, const std::string& code) {
    if (!j.is_object() || !j.contains(key) || j[key].is_null()) return fallback;
    if (!j[key].is_string()) throw InvalidArgument(code, std::string(key) + " must be a string");
    return j[key].get<std::string>();
}

}  // namespace moleda::service
