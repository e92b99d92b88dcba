#include <algorithm>
#include <set>

#include "moleda/docstore/json.hpp"
#include "moleda/docstore/store.hpp"

namespace moleda::docstore {

namespace {

std::string category_key(const Value& v) {
    if (is_text(v)) return std::get<std::string>(v);
    if (is_bool(v)) return std::get<bool>(v) ? "true" : "false";
    return to_json(v).dump();
}

struct Accumulator {
    std::vector<double> numbers;
    std::size_t non_null = 0;
    std::map<std::string, std::size_t> categories;
    std::map<std::string, std::vector<double>> groups;
};

}  // namespace

std::vector<FieldSummary> summarize_documents(const std::vector<const Document*>& docs,
                                              const std::vector<std::string>& requested, const SummaryOptions& opts) {
    if (opts.bins && (*opts.bins == 0 || *opts.bins > kMaxBins)) {
        throw InvalidArgument("invalid_bins", "bins must lie in [1, " + std::to_string(kMaxBins) + "]");
    }
    if (opts.group_by && opts.group_by->empty()) throw InvalidArgument("invalid_group_by", "group_by is empty");

    std::vector<std::string> fields = requested;
    if (fields.empty()) {
        std::set<std::string> names;
        for (const Document* d : docs) {
            for (const auto& [name, v] : d->fields) names.insert(name);
        }
        fields.assign(names.begin(), names.end());
    }
    for (const auto& f : fields) {
        if (f.empty()) throw InvalidArgument("invalid_field", "field names must be non-empty");
    }

    std::vector<Accumulator> acc(fields.size());
    for (const Document* d : docs) {
        std::optional<std::string> group;
        if (opts.group_by) {
            const Value& g = d->get(*opts.group_by);
            if (!is_null(g)) group = category_key(g);
        }
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const Value& v = fields[f] == "id" ? Value{d->id} : d->get(fields[f]);
            if (is_null(v)) continue;
            auto& a = acc[f];
            ++a.non_null;
            ++a.categories[category_key(v)];
            if (is_number(v)) {
                a.numbers.push_back(std::get<double>(v));
                if (group) a.groups[*group].push_back(std::get<double>(v));
            }
        }
    }

    std::vector<FieldSummary> out;
    out.reserve(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f) {
        auto& a = acc[f];
        FieldSummary s;
        s.field = fields[f];
        s.group_by = opts.group_by;
        const std::size_t others = a.non_null - a.numbers.size();
        if (!a.numbers.empty() && a.numbers.size() >= others) {
            s.kind = FieldKind::Numeric;
            s.count = a.numbers.size();
            NumericSummary ns = summarize_numbers(std::move(a.numbers), opts.bins);
            s.stats = ns.stats;
            s.histogram = std::move(ns.histogram);
            s.kde = std::move(ns.kde);
            s.boxplot = ns.boxplot;
            for (auto& [key, values] : a.groups) {
                std::sort(values.begin(), values.end());
                s.groups[key] = boxplot(values);
            }
        } else {
            if (opts.group_by) {
                throw InvalidArgument("non_numeric_field",
                                      "field '" + fields[f] + "' has no numeric values to compare across groups");
            }
            s.kind = a.non_null > 0 ? FieldKind::Categorical : FieldKind::Empty;
            s.count = a.non_null;
            if (s.kind == FieldKind::Categorical) s.categories = std::move(a.categories);
        }
        s.missing = docs.size() - s.count;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace moleda::docstore
