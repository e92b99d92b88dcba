#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "moleda/docstore/document.hpp"
#include "moleda/docstore/filter.hpp"
#include "moleda/docstore/summary.hpp"
#include "moleda/error.hpp"

namespace moleda::docstore {

/// Malformed input; aborts the whole ingest.
class IngestError : public InvalidArgument {
public:
    IngestError(std::string code, std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class Format { Jsonl, Csv };

/// Jsonl for ".jsonl"/".json", Csv for ".csv"; throws otherwise.
Format format_from_path(const std::filesystem::path& path);

struct Reject {
    std::size_t line = 0;
    std::string code;
    std::string message;
};

struct IngestReport {
    std::size_t inserted = 0;
    std::vector<Reject> rejects;
    /// Inserted documents whose smiles is the empty string.
    std::size_t empty_smiles = 0;
};

struct Limit {
    enum class Mode { All, First, Sample };
    Mode mode = Mode::All;
    std::size_t n = 0;
    std::uint64_t seed = 0;

    static Limit all() { return {}; }
    static Limit first(std::size_t n) { return {Mode::First, n, 0}; }
    static Limit sample(std::size_t n, std::uint64_t seed) { return {Mode::Sample, n, seed}; }
};

struct SummaryOptions {
    std::optional<std::size_t> bins;  // auto when empty
    std::optional<std::string> group_by;
};

struct CollectionInfo {
    std::string name;
    std::size_t size = 0;
};

/// Parses documents without touching any collection. Records without a
/// smiles text are skipped and reported; malformed input throws IngestError.
struct ParsedBatch {
    std::vector<Document> documents;
    std::vector<std::size_t> lines;
    std::vector<Reject> rejects;
};
ParsedBatch parse_documents(std::istream& in, Format format);

/// In-memory collections with optional JSONL snapshots in a data directory.
/// Readers share a collection; ingest and snapshot loading are exclusive.
class Store {
public:
    explicit Store(std::optional<std::filesystem::path> data_dir = std::nullopt);

    const std::optional<std::filesystem::path>& data_dir() const noexcept { return data_dir_; }

    /// Loads every `<name>.jsonl` snapshot in the data directory.
    void load_snapshots();

    /// Appends parsed documents; ids missing from the input become "doc-<ordinal>".
    /// All-or-nothing: a duplicate id or a parse error inserts nothing.
    IngestReport ingest(std::istream& in, Format format, const std::string& collection);

    std::vector<CollectionInfo> collections() const;
    bool has(const std::string& collection) const;
    std::size_t size(const std::string& collection) const;

    /// Field name → "number", "text", "bool", "null" or "mixed".
    std::map<std::string, std::string> field_types(const std::string& collection) const;

    /// Filtered, projected, truncated documents in insertion order. An empty
    /// projection keeps every field; id and smiles are always kept.
    std::vector<Document> fetch(const std::string& collection, const Filter& filter,
                                const std::vector<std::string>& fields = {}, const Limit& limit = {}) const;

    /// One pass over the matching documents.
    std::vector<FieldSummary> summarize(const std::string& collection, const std::vector<std::string>& fields,
                                        const Filter& filter = {}, const SummaryOptions& opts = {}) const;

    /// Writes `<data_dir>/<collection>.jsonl` through a temporary file and a rename.
    void snapshot(const std::string& collection) const;

private:
    struct Collection {
        std::string name;
        std::vector<Document> docs;
        std::unordered_map<std::string, std::size_t> by_id;
        mutable std::shared_mutex mutex;
    };

    std::shared_ptr<Collection> find(const std::string& name) const;
    std::shared_ptr<Collection> find_or_create(const std::string& name);

    std::optional<std::filesystem::path> data_dir_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Collection>> collections_;
};

/// Summaries over an already materialised document list (what Store::summarize
/// runs on the filtered view).
std::vector<FieldSummary> summarize_documents(const std::vector<const Document*>& docs,
                                              const std::vector<std::string>& fields, const SummaryOptions& opts);

/// Collection names must be non-empty and use only [A-Za-z0-9_.-], not starting with '.'.
void validate_collection_name(const std::string& name);

/// Placeholder for a remote document database backend; not implemented.
class RemoteStoreAdapter {
public:
    virtual ~RemoteStoreAdapter() = default;
    virtual std::vector<CollectionInfo> collections() const = 0;
    virtual std::vector<Document> fetch(const std::string& collection, const Filter& filter,
                                        const std::vector<std::string>& fields, const Limit& limit) const = 0;
};

}  // namespace moleda::docstore
