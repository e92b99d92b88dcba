#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "moleda/cluster.hpp"
#include "moleda/embed/ckpca.hpp"
#include "moleda/embed/embedding.hpp"
#include "moleda/fingerprint.hpp"
#include "moleda/quality.hpp"

namespace moleda::service {

using nlohmann::json;

/// {control_points:[{index,x,y}], must_links:[[i,j]], cannot_links:[[i,j]], mu_cp, mu_ml, mu_cl, lambda}.
/// Missing keys keep their defaults; unknown keys are rejected.
json to_json(const embed::ConstraintSet& c);
embed::ConstraintSet constraints_from_json(const json& j);

json to_json(const quality::QualityReport& q);
json to_json(const cluster::ValidityReport& v);

/// {method, version, coords: [[x, y], ...], provenance}
json to_json(const embed::Embedding& e);
json coords_json(const embed::Coords& coords);

/// `id,x,y` rows printed with 17 significant digits.
void write_coords_csv(std::ostream& out, const std::vector<std::string>& ids, const embed::Coords& coords);

/// Reads a JSON document from a file; errors carry `code`.
json read_json_file(const std::string& path, const std::string& code);

/// Typed accessors for request bodies: absent keys give the fallback, a wrong
/// type throws InvalidArgument(code).
double number_or(const json& j, const char* key, double fallback, const std::string& code);
long long integer_or(const json& j, const char* key, long long fallback, const std::string& code);
std::string string_or(const json& j, const char* key, const std::string& fallback, const std::string& code);

}  // namespace moleda::service
