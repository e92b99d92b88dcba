#include "moleda/docstore/document.hpp"

namespace moleda::docstore {

namespace {
const Value kNull{};
}

std::string_view type_name(const Value& v) noexcept {
    switch (v.index()) {
        case 1: return "number";
        case 2: return "text";
        case 3: return "bool";
        default: return "null";
    }
}

const Value& Document::get(std::string_view field) const {
    const auto it = fields.find(std::string(field));
    return it == fields.end() ? kNull : it->second;
}

bool Document::has(std::string_view field) const { return fields.count(std::string(field)) > 0; }

std::string Document::smiles() const {
    const Value& v = get(kSmilesField);
    return is_text(v) ? std::get<std::string>(v) : std::string{};
}

}  // namespace moleda::docstore
