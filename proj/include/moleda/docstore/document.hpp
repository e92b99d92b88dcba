#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace moleda::docstore {

/// A scalar field value. Documents are flat: no arrays or nested objects.
using Value = std::variant<std::monostate, double, std::string, bool>;

inline bool is_null(const Value& v) noexcept { return std::holds_alternative<std::monostate>(v); }
inline bool is_number(const Value& v) noexcept { return std::holds_alternative<double>(v); }
inline bool is_text(const Value& v) noexcept { return std::holds_alternative<std::string>(v); }
inline bool is_bool(const Value& v) noexcept { return std::holds_alternative<bool>(v); }

/// "null", "number", "text" or "bool".
std::string_view type_name(const Value& v) noexcept;

struct Document {
    std::string id;
    std::map<std::string, Value> fields;

    /// Null when the field is absent.
    const Value& get(std::string_view field) const;
    bool has(std::string_view field) const;
    /// The "smiles" field as text (empty if absent or not text).
    std::string smiles() const;

    bool operator==(const Document&) const = default;
};

inline constexpr std::string_view kSmilesField = "smiles";

}  // namespace moleda::docstore
