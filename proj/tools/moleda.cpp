#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "moleda/docstore/json.hpp"
#include "moleda/docstore/store.hpp"
#include "moleda/error.hpp"
#include "moleda/server/server.hpp"
#include "moleda/service/pipeline.hpp"

namespace fs = std::filesystem;
using namespace moleda;
using nlohmann::json;

namespace {

constexpr int kUsageError = 2;
constexpr int kDomainError = 1;

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::unique_ptr<docstore::Store> open_store(const std::string& data_dir) {
    std::error_code ec;
    fs::create_directories(data_dir, ec);
    if (ec || !fs::is_directory(data_dir)) throw Error("invalid_data_dir", "cannot create data directory '" + data_dir + "'");
    auto store = std::make_unique<docstore::Store>(fs::path{data_dir});
    store->load_snapshots();
    return store;
}

json parse_json_arg(const std::string& text, const std::string& code) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw InvalidArgument(code, "not valid JSON: " + std::string(e.what()));
    }
}

service::FingerprintSet load_fingerprints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("file_not_found", "cannot open '" + path + "'");
    auto set = service::read_fingerprints_jsonl(in);
    if (set.size() == 0) throw InvalidArgument("invalid_fingerprints", "'" + path + "' holds no fingerprints");
    return set;
}

embed::Coords read_coords_csv(const std::string& path, const std::vector<std::string>& ids) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("file_not_found", "cannot open '" + path + "'");
    const auto parsed = [&] {
        // reuse the CSV reader: coordinates files have no smiles column, so add one
        std::stringstream body;
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            body << (header ? "smiles," : ",") << line << '\n';
            header = false;
        }
        return docstore::parse_documents(body, docstore::Format::Csv);
    }();
    const auto& docs = parsed.documents;
    if (docs.size() != ids.size()) {
        throw InvalidArgument("misaligned_inputs", "coordinates have " + std::to_string(docs.size()) + " rows, fingerprints " +
                                                       std::to_string(ids.size()));
    }
    embed::Coords c(static_cast<Eigen::Index>(docs.size()), 2);
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].id != ids[i]) throw InvalidArgument("misaligned_inputs", "row " + std::to_string(i + 1) + " is '" + docs[i].id + "', expected '" + ids[i] + "'");
        const auto& x = docs[i].get("x");
        const auto& y = docs[i].get("y");
        if (!docstore::is_number(x) || !docstore::is_number(y)) {
            throw InvalidArgument("invalid_coords", "row " + std::to_string(i + 1) + " needs numeric x and y");
        }
        c(static_cast<Eigen::Index>(i), 0) = std::get<double>(x);
        c(static_cast<Eigen::Index>(i), 1) = std::get<double>(y);
    }
    return c;
}

sigset_t block_shutdown_signals() {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    return set;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Molecular data exploration: summarise, fingerprint, cluster and embed molecule collections."};
    app.require_subcommand(1);
    std::string data_dir = std::getenv("MOLEDA_DATA_DIR") ? std::getenv("MOLEDA_DATA_DIR") : "moleda-data";
    std::string log_level = "warn";
    app.add_option("--data-dir", data_dir, "Directory holding collection snapshots")->capture_default_str();
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
        ->capture_default_str();

    std::string file, collection, format, filter_text = "{}";
    std::string method, kernel, constraints_path, out_path, algo = "kmeans", linkage = "ward", coords_path, bind = "127.0.0.1:8080";
    std::vector<std::string> fields;
    std::optional<std::size_t> bins, limit, sample;
    std::optional<std::string> group_by;
    std::optional<double> gamma, perplexity, learning_rate;
    std::optional<int> max_len, iters, k_neighbors, quality_k;
    std::optional<std::uint32_t> n_bits;
    std::uint64_t seed = 0;
    int k = 0;
    int threads = 4, ttl_minutes = 60;

    auto* ingest = app.add_subcommand("ingest", "Load a JSONL or CSV file into a collection");
    ingest->add_option("file", file, "Input file")->required()->check(CLI::ExistingFile);
    ingest->add_option("--collection,-c", collection, "Target collection")->required();
    ingest->add_option("--format", format, "jsonl or csv (default: from the extension)")->check(CLI::IsMember({"jsonl", "csv"}));

    auto* summarize = app.add_subcommand("summarize", "Summary statistics of collection fields");
    summarize->add_option("collection", collection)->required();
    summarize->add_option("--fields", fields, "Fields to summarise (default: all)");
    summarize->add_option("--filter", filter_text, "Filter as a JSON object");
    summarize->add_option("--bins", bins, "Histogram bins (default: Freedman-Diaconis)");
    summarize->add_option("--group-by", group_by, "Categorical field for comparison box plots");

    auto* fingerprint = app.add_subcommand("fingerprint", "Fingerprint the molecules of a collection");
    fingerprint->add_option("collection", collection)->required();
    fingerprint->add_option("--method", method, "hashed_path or atmo_keys")->default_val("hashed_path");
    fingerprint->add_option("--max-len", max_len, "Longest path in bonds (hashed_path)");
    fingerprint->add_option("--n-bits", n_bits, "Fingerprint length (hashed_path)");
    fingerprint->add_option("--filter", filter_text, "Filter as a JSON object");
    auto* limit_opt = fingerprint->add_option("--limit", limit, "Keep the first N matches");
    fingerprint->add_option("--sample", sample, "Uniform sample of N matches")->excludes(limit_opt);
    fingerprint->add_option("--seed", seed, "Sampling seed");
    fingerprint->add_option("--out,-o", out_path, "Output JSONL file")->required();

    auto* cluster = app.add_subcommand("cluster", "Cluster fingerprints");
    cluster->add_option("fingerprints", file, "Fingerprint JSONL")->required();
    cluster->add_option("--algo", algo, "kmeans or agglomerative")->capture_default_str();
    cluster->add_option("--k", k, "Number of clusters")->required();
    cluster->add_option("--seed", seed, "k-means seed");
    cluster->add_option("--linkage", linkage, "single, average or ward")->capture_default_str();

    auto* embed_cmd = app.add_subcommand("embed", "Embed fingerprints in 2-D");
    embed_cmd->add_option("fingerprints", file, "Fingerprint JSONL")->required();
    embed_cmd->add_option("--method", method, "pca, kpca, ckpca, tsne or lsp")->required();
    embed_cmd->add_option("--kernel", kernel, "linear, rbf or tanimoto (kpca, ckpca)");
    embed_cmd->add_option("--gamma", gamma, "rbf width");
    embed_cmd->add_option("--constraints", constraints_path, "Constraint set JSON (ckpca, lsp)")->check(CLI::ExistingFile);
    embed_cmd->add_option("--perplexity", perplexity);
    embed_cmd->add_option("--iters", iters);
    embed_cmd->add_option("--learning-rate", learning_rate);
    embed_cmd->add_option("--seed", seed, "t-SNE seed");
    embed_cmd->add_option("--k-neighbors", k_neighbors, "LSP neighbourhood size");
    embed_cmd->add_option("--quality-k", quality_k, "Neighbourhood size of the quality report");
    embed_cmd->add_option("--out,-o", out_path, "Coordinates CSV (id,x,y)")->required();

    auto* quality_cmd = app.add_subcommand("quality", "Score an embedding against its fingerprints");
    quality_cmd->add_option("fingerprints", file, "Fingerprint JSONL")->required();
    quality_cmd->add_option("coords", coords_path, "Coordinates CSV")->required();
    quality_cmd->add_option("--k", quality_k, "Neighbourhood size (default: min(10, largest admissible))");

    auto* serve = app.add_subcommand("serve", "Run the HTTP and WebSocket server");
    serve->add_option("--bind", bind, "host:port")->capture_default_str();
    serve->add_option("--threads", threads, "I/O threads")->check(CLI::Range(1, 256))->capture_default_str();
    serve->add_option("--session-ttl", ttl_minutes, "Idle minutes before a session is dropped")
        ->check(CLI::Range(1, 100000))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsageError;
    }

    auto logger = spdlog::stderr_color_mt("moleda");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*ingest) {
            const auto owned = open_store(data_dir);
            auto& store = *owned;
            const auto fmt = format.empty() ? docstore::format_from_path(file)
                                            : (format == "csv" ? docstore::Format::Csv : docstore::Format::Jsonl);
            std::ifstream in(file, std::ios::binary);
            if (!in) throw InvalidArgument("file_not_found", "cannot open '" + file + "'");
            json report = docstore::to_json(store.ingest(in, fmt, collection));
            store.snapshot(collection);
            report["collection"] = collection;
            report["size"] = store.size(collection);
            print_json(report);
        } else if (*summarize) {
            const auto owned = open_store(data_dir);
            auto& store = *owned;
            docstore::SummaryOptions opts;
            opts.bins = bins;
            opts.group_by = group_by;
            json out = json::array();
            for (const auto& s : store.summarize(collection, fields,
                                                 docstore::filter_from_json(parse_json_arg(filter_text, "invalid_filter")), opts)) {
                out.push_back(docstore::to_json(s));
            }
            print_json({{"collection", collection}, {"std_kind", "population"}, {"summaries", out}});
        } else if (*fingerprint) {
            const auto owned = open_store(data_dir);
            auto& store = *owned;
            json params = json::object();
            if (max_len) params["max_len"] = *max_len;
            if (n_bits) params["n_bits"] = *n_bits;
            const auto req = service::fingerprint_request_from_json({{"method", method}, {"params", params}});
            const auto lim = sample ? docstore::Limit::sample(*sample, seed)
                                    : limit ? docstore::Limit::first(*limit) : docstore::Limit::all();
            const auto docs =
                store.fetch(collection, docstore::filter_from_json(parse_json_arg(filter_text, "invalid_filter")), {}, lim);
            const auto set = service::fingerprint_documents(docs, req);
            std::ofstream out(out_path, std::ios::binary);
            if (!out) throw Error("io_error", "cannot write '" + out_path + "'");
            service::write_fingerprints_jsonl(out, set);
            json stats = service::fingerprint_stats_json(set);
            stats["collection"] = collection;
            stats["out"] = out_path;
            print_json(stats);
        } else if (*cluster) {
            const auto set = load_fingerprints(file);
            json body = {{"algo", algo}, {"k", k}, {"linkage", linkage}, {"seed", seed}};
            const auto req = service::cluster_request_from_json(body);
            json out = service::to_json(service::run_cluster(service::dense_bits(set), req), req);
            out["ids"] = set.ids;
            print_json(out);
        } else if (*embed_cmd) {
            const auto set = load_fingerprints(file);
            json body = {{"method", method}};
            if (!kernel.empty() || gamma) {
                body["kernel"] = {{"kind", kernel.empty() ? "rbf" : kernel}};
                if (gamma) body["kernel"]["gamma"] = *gamma;
            }
            json params = {{"seed", seed}};
            if (perplexity) params["perplexity"] = *perplexity;
            if (iters) params["iters"] = *iters;
            if (learning_rate) params["learning_rate"] = *learning_rate;
            if (k_neighbors) params["k_neighbors"] = *k_neighbors;
            if (quality_k) params["quality_k"] = *quality_k;
            body["params"] = params;
            if (!constraints_path.empty()) body["constraints"] = service::read_json_file(constraints_path, "invalid_constraint");
            const auto req = service::embed_request_from_json(body);
            const auto r = service::run_embed(service::dense_bits(set), req);
            {
                std::ofstream out(out_path, std::ios::binary);
                if (!out) throw Error("io_error", "cannot write '" + out_path + "'");
                service::write_coords_csv(out, set.ids, r.embedding.coords);
            }
            json report = {{"method", embed::method_name(r.embedding.method)},
                           {"provenance", r.embedding.provenance},
                           {"count", set.size()},
                           {"out", out_path},
                           {"quality", r.quality ? service::to_json(*r.quality) : json(nullptr)}};
            if (r.state) report["constraints"] = service::to_json(r.state->constraints());
            print_json(report);
        } else if (*quality_cmd) {
            const auto set = load_fingerprints(file);
            const auto coords = read_coords_csv(coords_path, set.ids);
            const auto q = service::score(service::dense_bits(set), coords, quality_k);
            if (!q) throw InvalidArgument("too_few_points", "too few points for a quality report");
            print_json(service::to_json(*q));
        } else if (*serve) {
            server::ServerConfig cfg;
            server::parse_bind(bind, cfg);
            cfg.io_threads = threads;
            cfg.session_ttl = std::chrono::minutes(ttl_minutes);
            const auto owned = open_store(data_dir);
            auto& store = *owned;
            const sigset_t signals = block_shutdown_signals();
            server::Server srv(store, cfg);
            const auto port = srv.start();
            std::cerr << "moleda serving " << cfg.host << ":" << port << " (data: " << data_dir << ")" << std::endl;
            int sig = 0;
            sigwait(&signals, &sig);
            spdlog::info("signal {}, shutting down", sig);
            srv.stop();
        }
    } catch (const Error& e) {
        std::cerr << json{{"code", e.code()}, {"message", e.what()}}.dump() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        std::cerr << json{{"code", "internal_error"}, {"message", e.what()}}.dump() << '\n';
        return kDomainError;
    }
    return 0;
}
