#include "moleda/docstore/json.hpp"

#include <cmath>

namespace moleda::docstore {

using nlohmann::json;

json to_json(const Value& v) {
    switch (v.index()) {
        case 1: return std::get<double>(v);
        case 2: return std::get<std::string>(v);
        case 3: return std::get<bool>(v);
        default: return nullptr;
    }
}

Value value_from_json(const json& j) {
    if (j.is_null()) return Value{};
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) {
        const double d = j.get<double>();
        if (!std::isfinite(d)) throw InvalidArgument("invalid_value", "numbers must be finite");
        return d;
    }
    if (j.is_string()) return j.get<std::string>();
    throw InvalidArgument("nested_value", "documents are flat: arrays and objects are not allowed as values");
}

json to_json(const Document& d) {
    json j = json::object();
    for (const auto& [name, value] : d.fields) j[name] = to_json(value);
    j["id"] = d.id;
    return j;
}

namespace {

[[noreturn]] void bad(const std::string& message) { throw InvalidArgument("invalid_filter", message); }

Value scalar(const json& j) {
    if (j.is_array() || j.is_object()) bad("filter operands must be scalars");
    return value_from_json(j);
}

Filter field_condition(const std::string& field, const json& cond) {
    if (field.empty()) bad("field names must be non-empty");
    if (!cond.is_object()) return Filter::predicate(field, FilterOp::Eq, scalar(cond));
    if (cond.empty()) bad("empty operator object for field '" + field + "'");
    std::vector<Filter> parts;
    for (auto it = cond.begin(); it != cond.end(); ++it) {
        const std::string& op = it.key();
        const json& arg = *it;
        if (op == "$eq") {
            parts.push_back(Filter::predicate(field, FilterOp::Eq, scalar(arg)));
        } else if (op == "$ne") {
            parts.push_back(Filter::predicate(field, FilterOp::Ne, scalar(arg)));
        } else if (op == "$lt") {
            parts.push_back(Filter::predicate(field, FilterOp::Lt, scalar(arg)));
        } else if (op == "$lte") {
            parts.push_back(Filter::predicate(field, FilterOp::Lte, scalar(arg)));
        } else if (op == "$gt") {
            parts.push_back(Filter::predicate(field, FilterOp::Gt, scalar(arg)));
        } else if (op == "$gte") {
            parts.push_back(Filter::predicate(field, FilterOp::Gte, scalar(arg)));
        } else if (op == "$contains") {
            if (!arg.is_string()) bad("$contains takes a string");
            parts.push_back(Filter::predicate(field, FilterOp::Contains, arg.get<std::string>()));
        } else if (op == "$exists") {
            if (!arg.is_boolean()) bad("$exists takes a boolean");
            parts.push_back(Filter::predicate(field, FilterOp::Exists, arg.get<bool>()));
        } else if (op == "$in") {
            if (!arg.is_array() || arg.empty()) bad("$in takes a non-empty array");
            std::vector<Value> values;
            for (const auto& v : arg) values.push_back(scalar(v));
            parts.push_back(Filter::in(field, std::move(values)));
        } else {
            bad("unknown operator '" + op + "'");
        }
    }
    return parts.size() == 1 ? std::move(parts.front()) : Filter::all_of(std::move(parts));
}

std::vector<Filter> filter_list(const json& j, const char* op) {
    if (!j.is_array() || j.empty()) bad(std::string(op) + " takes a non-empty array of filters");
    std::vector<Filter> out;
    for (const auto& child : j) out.push_back(filter_from_json(child));
    return out;
}

}  // namespace

Filter filter_from_json(const json& j) {
    if (j.is_null()) return Filter::all();
    if (!j.is_object()) bad("a filter must be a JSON object");
    std::vector<Filter> parts;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "$and") {
            parts.push_back(Filter::all_of(filter_list(*it, "$and")));
        } else if (key == "$or") {
            parts.push_back(Filter::any_of(filter_list(*it, "$or")));
        } else if (key == "$not") {
            if (!it->is_object()) bad("$not takes a filter object");
            parts.push_back(Filter::negate(filter_from_json(*it)));
        } else if (!key.empty() && key.front() == '$') {
            bad("unknown combinator '" + key + "'");
        } else {
            parts.push_back(field_condition(key, *it));
        }
    }
    if (parts.empty()) return Filter::all();
    return parts.size() == 1 ? std::move(parts.front()) : Filter::all_of(std::move(parts));
}

json to_json(const Boxplot& b) {
    return {{"median", b.median}, {"q1", b.q1},           {"q3", b.q3},
            {"whisker_lo", b.whisker_lo}, {"whisker_hi", b.whisker_hi}, {"outliers", b.outliers}};
}

json to_json(const FieldSummary& s) {
    json j;
    j["field"] = s.field;
    j["kind"] = s.kind == FieldKind::Numeric ? "numeric" : s.kind == FieldKind::Categorical ? "categorical" : "empty";
    j["count"] = s.count;
    j["missing"] = s.missing;
    j["std_kind"] = "population";
    for (const char* k : {"min", "max", "mean", "std", "q1", "median", "q3"}) j[k] = nullptr;
    if (s.stats) {
        j["min"] = s.stats->min;
        j["max"] = s.stats->max;
        j["mean"] = s.stats->mean;
        j["std"] = s.stats->std;
        j["q1"] = s.stats->q1;
        j["median"] = s.stats->median;
        j["q3"] = s.stats->q3;
    }
    j["histogram"] = json::array();
    for (const auto& b : s.histogram) j["histogram"].push_back({{"left", b.left}, {"right", b.right}, {"count", b.count}});
    j["kde"] = json::array();
    for (const auto& p : s.kde) j["kde"].push_back({p.x, p.density});
    j["boxplot"] = s.boxplot ? to_json(*s.boxplot) : json(nullptr);
    j["categories"] = json::object();
    for (const auto& [k, n] : s.categories) j["categories"][k] = n;
    j["groups"] = json::object();
    for (const auto& [k, b] : s.groups) j["groups"][k] = to_json(b);
    j["group_by"] = s.group_by ? json(*s.group_by) : json(nullptr);
    return j;
}

json to_json(const IngestReport& r) {
    json rejects = json::array();
    for (const auto& rj : r.rejects) rejects.push_back({{"line", rj.line}, {"code", rj.code}, {"message", rj.message}});
    return {{"inserted", r.inserted}, {"rejected", r.rejects.size()}, {"rejects", rejects}, {"empty_smiles", r.empty_smiles}};
}

Limit limit_from_json(const json& j) {
    if (j.is_null()) return Limit::all();
    const auto count = [](const json& v, const char* what) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw InvalidArgument("invalid_limit", std::string(what) + " must be a non-negative integer");
        }
        return static_cast<std::size_t>(v.get<long long>());
    };
    if (j.is_number_integer()) return Limit::first(count(j, "limit"));
    if (j.is_string() && j.get<std::string>() == "all") return Limit::all();
    if (!j.is_object()) throw InvalidArgument("invalid_limit", "limit must be \"all\", an integer or an object");
    if (j.contains("sample")) {
        std::uint64_t seed = 0;
        if (j.contains("seed")) {
            if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
                throw InvalidArgument("invalid_limit", "seed must be a non-negative integer");
            }
            seed = j["seed"].get<std::uint64_t>();
        }
        return Limit::sample(count(j["sample"], "sample"), seed);
    }
    if (j.contains("first")) return Limit::first(count(j["first"], "first"));
    if (j.value("all", false)) return Limit::all();
    throw InvalidArgument("invalid_limit", "limit object needs \"first\", \"sample\" or \"all\"");
}

}  // namespace moleda::docstore
