#include "moleda/docstore/filter.hpp"

#include <algorithm>
#include <optional>

namespace moleda::docstore {

Filter Filter::predicate(std::string field, FilterOp op, Value value) {
    Filter f;
    f.kind = Kind::Predicate;
    f.field = std::move(field);
    f.op = op;
    f.value = std::move(value);
    return f;
}

Filter Filter::in(std::string field, std::vector<Value> values) {
    Filter f;
    f.kind = Kind::Predicate;
    f.field = std::move(field);
    f.op = FilterOp::In;
    f.values = std::move(values);
    return f;
}

Filter Filter::all_of(std::vector<Filter> children) {
    Filter f;
    f.kind = Kind::And;
    f.children = std::move(children);
    return f;
}

Filter Filter::any_of(std::vector<Filter> children) {
    Filter f;
    f.kind = Kind::Or;
    f.children = std::move(children);
    return f;
}

Filter Filter::negate(Filter child) {
    Filter f;
    f.kind = Kind::Not;
    f.children.push_back(std::move(child));
    return f;
}

namespace {

bool equal(const Value& field, const Value& v) {
    if (is_null(v)) return is_null(field);
    return field == v;
}

/// -1, 0, 1, or nullopt when the values are not comparable.
std::optional<int> compare(const Value& a, const Value& b) {
    if (is_number(a) && is_number(b)) {
        const double x = std::get<double>(a), y = std::get<double>(b);
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (is_text(a) && is_text(b)) {
        const int c = std::get<std::string>(a).compare(std::get<std::string>(b));
        return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    return std::nullopt;
}

bool test(const Value& field, FilterOp op, const Filter& f) {
    switch (op) {
        case FilterOp::Eq: return equal(field, f.value);
        case FilterOp::Ne: return !equal(field, f.value);
        case FilterOp::In:
            return std::any_of(f.values.begin(), f.values.end(), [&](const Value& v) { return equal(field, v); });
        case FilterOp::Exists: {
            const bool want = !is_bool(f.value) || std::get<bool>(f.value);
            return !is_null(field) == want;
        }
        case FilterOp::Contains:
            return is_text(field) && is_text(f.value) &&
                   std::get<std::string>(field).find(std::get<std::string>(f.value)) != std::string::npos;
        default: break;
    }
    const auto c = compare(field, f.value);
    if (!c) return false;
    switch (op) {
        case FilterOp::Lt: return *c < 0;
        case FilterOp::Lte: return *c <= 0;
        case FilterOp::Gt: return *c > 0;
        case FilterOp::Gte: return *c >= 0;
        default: return false;
    }
}

}  // namespace

bool matches(const Document& doc, const Filter& filter) {
    switch (filter.kind) {
        case Filter::Kind::All: return true;
        case Filter::Kind::Predicate: {
            if (filter.field == "id") return test(Value{doc.id}, filter.op, filter);
            return test(doc.get(filter.field), filter.op, filter);
        }
        case Filter::Kind::And:
            return std::all_of(filter.children.begin(), filter.children.end(),
                               [&](const Filter& c) { return matches(doc, c); });
        case Filter::Kind::Or:
            return std::any_of(filter.children.begin(), filter.children.end(),
                               [&](const Filter& c) { return matches(doc, c); });
        case Filter::Kind::Not: return !filter.children.empty() && !matches(doc, filter.children.front());
    }
    return false;
}

}  // namespace moleda::docstore
