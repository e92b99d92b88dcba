#pragma once

#include <memory>
#include <string>
#include <vector>

#include "moleda/docstore/document.hpp"

namespace moleda::docstore {

enum class FilterOp { Eq, Ne, Lt, Lte, Gt, Gte, In, Exists, Contains };

/// Predicate tree over document fields. The default filter matches everything.
struct Filter {
    enum class Kind { All, Predicate, And, Or, Not };

    Kind kind = Kind::All;
    std::string field;
    FilterOp op = FilterOp::Eq;
    Value value;
    std::vector<Value> values;  // $in
    std::vector<Filter> children;

    static Filter all() { return {}; }
    static Filter predicate(std::string field, FilterOp op, Value value);
    static Filter in(std::string field, std::vector<Value> values);
    static Filter all_of(std::vector<Filter> children);
    static Filter any_of(std::vector<Filter> children);
    static Filter negate(Filter child);
};

/// Never throws: comparisons across types are simply false. "eq null"
/// matches absent or null fields; "exists" is true for present non-null ones.
bool matches(const Document& doc, const Filter& filter);

}  // namespace moleda::docstore
