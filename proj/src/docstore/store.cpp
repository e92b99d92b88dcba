#include "moleda/docstore/store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <random>
#include <set>
#include <sstream>

#include "moleda/docstore/json.hpp"

namespace moleda::docstore {

IngestError::IngestError(std::string code, std::size_t line, const std::string& message)
    : InvalidArgument(std::move(code), "line " + std::to_string(line) + ": " + message), line_(line) {}

Format format_from_path(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return Format::Jsonl;
    if (ext == ".csv") return Format::Csv;
    throw InvalidArgument("unknown_format", "cannot infer the format of '" + path.string() + "' (use .jsonl or .csv)");
}

void validate_collection_name(const std::string& name) {
    const bool ok = !name.empty() && name.front() != '.' && name.size() <= 128 &&
                    std::all_of(name.begin(), name.end(), [](char c) {
                        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
                    });
    if (!ok) throw InvalidArgument("invalid_collection_name", "invalid collection name '" + name + "'");
}

namespace {

void reject_missing_smiles(ParsedBatch& batch, std::size_t line) {
    batch.rejects.push_back({line, "missing_smiles", "record has no smiles text"});
}

void parse_jsonl(std::istream& in, ParsedBatch& batch) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw IngestError("parse_error", line, e.what());
        }
        if (!j.is_object()) throw IngestError("parse_error", line, "expected a JSON object");
        Document doc;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "id") {
                if (it->is_string()) {
                    doc.id = it->get<std::string>();
                } else if (it->is_number_integer()) {
                    doc.id = it->dump();
                } else if (!it->is_null()) {
                    throw IngestError("parse_error", line, "id must be a string or an integer");
                }
                continue;
            }
            if (it.key().empty()) throw IngestError("parse_error", line, "empty field name");
            try {
                doc.fields[it.key()] = value_from_json(*it);
            } catch (const InvalidArgument& e) {
                throw IngestError(e.code(), line, e.what());
            }
        }
        if (!is_text(doc.get(kSmilesField))) {
            reject_missing_smiles(batch, line);
            continue;
        }
        batch.documents.push_back(std::move(doc));
        batch.lines.push_back(line);
    }
}

/// Splits one CSV record, which may span several physical lines when quoted.
bool read_csv_record(std::istream& in, std::vector<std::string>& cells, std::size_t& line) {
    cells.clear();
    std::string text;
    if (!std::getline(in, text)) return false;
    ++line;
    const std::size_t start_line = line;
    std::string cell;
    bool quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i >= text.size() || (text[i] == '\r' && i + 1 == text.size())) {
            if (!quoted) break;
            std::string more;
            if (!std::getline(in, more)) throw IngestError("parse_error", start_line, "unterminated quoted field");
            ++line;
            cell += '\n';
            text = std::move(more);
            i = 0;
            continue;
        }
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            if (!cell.empty()) throw IngestError("parse_error", line, "quote inside an unquoted field");
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else {
            cell += c;
        }
        ++i;
    }
    cells.push_back(std::move(cell));
    return true;
}

Value csv_value(const std::string& cell) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (!cell.empty() && !std::isspace(static_cast<unsigned char>(cell.front()))) {
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec == std::errc{} && ptr == last && std::isfinite(v)) return v;
    }
    return cell;
}

void parse_csv(std::istream& in, ParsedBatch& batch) {
    std::size_t line = 0;
    std::vector<std::string> header;
    if (!read_csv_record(in, header, line)) return;
    if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
    std::set<std::string> seen;
    for (const auto& h : header) {
        if (h.empty()) throw IngestError("invalid_header", line, "empty column name");
        if (!seen.insert(h).second) throw IngestError("invalid_header", line, "duplicate column '" + h + "'");
    }
    std::vector<std::string> cells;
    while (true) {
        const std::size_t record_line = line + 1;
        if (!read_csv_record(in, cells, line)) break;
        if (cells.size() == 1 && cells[0].empty()) continue;
        if (cells.size() != header.size()) {
            throw IngestError("parse_error", record_line,
                              "expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()));
        }
        Document doc;
        bool has_smiles = false;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == "id") {
                doc.id = cells[c];
            } else if (header[c] == kSmilesField) {
                doc.fields[header[c]] = cells[c];
                has_smiles = true;
            } else if (!cells[c].empty()) {
                doc.fields[header[c]] = csv_value(cells[c]);
            }
        }
        if (!has_smiles) {
            reject_missing_smiles(batch, record_line);
            continue;
        }
        batch.documents.push_back(std::move(doc));
        batch.lines.push_back(record_line);
    }
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

ParsedBatch parse_documents(std::istream& in, Format format) {
    ParsedBatch batch;
    if (format == Format::Jsonl) {
        parse_jsonl(in, batch);
    } else {
        parse_csv(in, batch);
    }
    return batch;
}

Store::Store(std::optional<std::filesystem::path> data_dir) : data_dir_(std::move(data_dir)) {}

std::shared_ptr<Store::Collection> Store::find(const std::string& name) const {
    std::lock_guard lock(mutex_);
    const auto it = collections_.find(name);
    if (it == collections_.end()) throw NotFound("unknown_collection", "no collection named '" + name + "'");
    return it->second;
}

std::shared_ptr<Store::Collection> Store::find_or_create(const std::string& name) {
    validate_collection_name(name);
    std::lock_guard lock(mutex_);
    auto& slot = collections_[name];
    if (!slot) {
        slot = std::make_shared<Collection>();
        slot->name = name;
    }
    return slot;
}

IngestReport Store::ingest(std::istream& in, Format format, const std::string& collection) {
    validate_collection_name(collection);
    ParsedBatch batch = parse_documents(in, format);
    auto coll = find_or_create(collection);
    std::unique_lock lock(coll->mutex);

    std::unordered_map<std::string, std::size_t> added;
    std::size_t ordinal = coll->docs.size();
    for (std::size_t d = 0; d < batch.documents.size(); ++d) {
        auto& doc = batch.documents[d];
        ++ordinal;
        if (doc.id.empty()) doc.id = "doc-" + std::to_string(ordinal);
        if (coll->by_id.count(doc.id) || !added.emplace(doc.id, d).second) {
            throw IngestError("duplicate_id", batch.lines[d], "duplicate document id '" + doc.id + "'");
        }
    }

    IngestReport report;
    report.rejects = std::move(batch.rejects);
    for (auto& doc : batch.documents) {
        if (doc.smiles().empty()) ++report.empty_smiles;
        coll->by_id.emplace(doc.id, coll->docs.size());
        coll->docs.push_back(std::move(doc));
        ++report.inserted;
    }
    return report;
}

void Store::load_snapshots() {
    if (!data_dir_) return;
    std::error_code ec;
    if (!std::filesystem::is_directory(*data_dir_, ec)) return;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(*data_dir_)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        const std::string name = path.stem().string();
        try {
            validate_collection_name(name);
        } catch (const InvalidArgument&) {
            continue;
        }
        std::ifstream in(path);
        ParsedBatch batch = parse_documents(in, Format::Jsonl);
        auto fresh = std::make_shared<Collection>();
        fresh->name = name;
        for (auto& doc : batch.documents) {
            if (!fresh->by_id.emplace(doc.id, fresh->docs.size()).second) {
                throw InvalidArgument("duplicate_id", "snapshot " + path.string() + " repeats id '" + doc.id + "'");
            }
            fresh->docs.push_back(std::move(doc));
        }
        std::lock_guard lock(mutex_);
        collections_[name] = std::move(fresh);
    }
}

std::vector<CollectionInfo> Store::collections() const {
    std::vector<std::shared_ptr<Collection>> all;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [name, c] : collections_) all.push_back(c);
    }
    std::vector<CollectionInfo> out;
    for (const auto& c : all) {
        std::shared_lock lock(c->mutex);
        out.push_back({c->name, c->docs.size()});
    }
    return out;
}

bool Store::has(const std::string& collection) const {
    std::lock_guard lock(mutex_);
    return collections_.count(collection) > 0;
}

std::size_t Store::size(const std::string& collection) const {
    auto c = find(collection);
    std::shared_lock lock(c->mutex);
    return c->docs.size();
}

std::map<std::string, std::string> Store::field_types(const std::string& collection) const {
    auto c = find(collection);
    std::shared_lock lock(c->mutex);
    std::map<std::string, std::set<std::string_view>> kinds;
    for (const auto& doc : c->docs) {
        for (const auto& [name, value] : doc.fields) kinds[name].insert(type_name(value));
    }
    std::map<std::string, std::string> out;
    for (auto& [name, set] : kinds) {
        if (set.size() > 1) set.erase("null");
        out[name] = set.size() == 1 ? std::string(*set.begin()) : "mixed";
    }
    return out;
}

std::vector<Document> Store::fetch(const std::string& collection, const Filter& filter,
                                   const std::vector<std::string>& fields, const Limit& limit) const {
    auto c = find(collection);
    std::shared_lock lock(c->mutex);
    std::vector<const Document*> hits;
    for (const auto& doc : c->docs) {
        if (matches(doc, filter)) hits.push_back(&doc);
    }

    std::vector<const Document*> chosen;
    switch (limit.mode) {
        case Limit::Mode::All: chosen = std::move(hits); break;
        case Limit::Mode::First:
            chosen.assign(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(std::min(limit.n, hits.size())));
            break;
        case Limit::Mode::Sample: {
            // selection sampling: uniform without replacement, order preserved
            std::mt19937_64 rng(limit.seed);
            std::size_t needed = std::min(limit.n, hits.size());
            for (std::size_t i = 0; i < hits.size() && needed > 0; ++i) {
                const double remaining = static_cast<double>(hits.size() - i);
                if (uniform01(rng) * remaining < static_cast<double>(needed)) {
                    chosen.push_back(hits[i]);
                    --needed;
                }
            }
            break;
        }
    }

    std::vector<Document> out;
    out.reserve(chosen.size());
    for (const Document* doc : chosen) {
        if (fields.empty()) {
            out.push_back(*doc);
            continue;
        }
        Document projected;
        projected.id = doc->id;
        for (const auto& f : fields) {
            const auto it = doc->fields.find(f);
            if (it != doc->fields.end()) projected.fields.insert(*it);
        }
        const auto sm = doc->fields.find(std::string(kSmilesField));
        if (sm != doc->fields.end()) projected.fields.insert(*sm);
        out.push_back(std::move(projected));
    }
    return out;
}

std::vector<FieldSummary> Store::summarize(const std::string& collection, const std::vector<std::string>& fields,
                                           const Filter& filter, const SummaryOptions& opts) const {
    auto c = find(collection);
    std::shared_lock lock(c->mutex);
    std::vector<const Document*> view;
    for (const auto& doc : c->docs) {
        if (matches(doc, filter)) view.push_back(&doc);
    }
    return summarize_documents(view, fields, opts);
}

void Store::snapshot(const std::string& collection) const {
    if (!data_dir_) throw InvalidArgument("no_data_dir", "the store has no data directory");
    auto c = find(collection);
    std::filesystem::create_directories(*data_dir_);
    const auto target = *data_dir_ / (collection + ".jsonl");
    const auto temp = *data_dir_ / ("." + collection + ".jsonl.tmp");
    {
        std::shared_lock lock(c->mutex);
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io_error", "cannot write " + temp.string());
        for (const auto& doc : c->docs) {
            nlohmann::ordered_json line;
            line["id"] = doc.id;
            for (const auto& [name, value] : doc.fields) line[name] = to_json(value);
            out << line.dump() << '\n';
        }
        out.flush();
        if (!out) throw Error("io_error", "failed writing " + temp.string());
    }
    std::filesystem::rename(temp, target);
}

}  // namespace moleda::docstore
