#pragma once

#include <json.hpp>

#include "moleda/docstore/document.hpp"
#include "moleda/docstore/filter.hpp"
#include "moleda/docstore/store.hpp"
#include "moleda/docstore/summary.hpp"

namespace moleda::docstore {

nlohmann::json to_json(const Value& v);
/// Throws InvalidArgument("nested_value") for arrays and objects.
Value value_from_json(const nlohmann::json& j);

/// {"id": ..., <fields>...}
nlohmann::json to_json(const Document& d);

/// Query syntax: {} matches everything; {"f": v} is equality;
/// {"f": {"$gt": 1, "$lt": 5}} conjoins operators; "$and"/"$or" take arrays,
/// "$not" takes a filter. Throws InvalidArgument("invalid_filter").
Filter filter_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FieldSummary& s);
nlohmann::json to_json(const Boxplot& b);
nlohmann::json to_json(const IngestReport& r);

/// {"all": true} | {"first": n} | {"sample": n, "seed": s}; null means all.
Limit limit_from_json(const nlohmann::json& j);

}  // namespace moleda::docstore
