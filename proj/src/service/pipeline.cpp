#include "moleda/service/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "moleda/embed/lsp.hpp"
#include "moleda/embed/spectral.hpp"
#include "moleda/error.hpp"
#include "moleda/smiles.hpp"

namespace moleda::service {

FingerprintRequest fingerprint_request_from_json(const json& j) {
    if (!j.is_null() && !j.is_object()) throw InvalidArgument("invalid_params", "fingerprint request must be an object");
    FingerprintRequest req;
    req.method = fingerprint::method_from_name(string_or(j, "method", "hashed_path", "invalid_params"));
    const json params = j.is_object() && j.contains("params") ? j["params"] : json::object();
    const long long max_len = integer_or(params, "max_len", req.path.max_len, "invalid_path_config");
    const long long n_bits = integer_or(params, "n_bits", req.path.n_bits, "invalid_path_config");
    if (max_len < 0 || max_len > 64 || n_bits < 0 || n_bits > (1LL << 24)) {
        throw InvalidArgument("invalid_path_config", "max_len or n_bits out of range");
    }
    req.path.max_len = static_cast<int>(max_len);
    req.path.n_bits = static_cast<std::uint32_t>(n_bits);
    if (req.method == fingerprint::Method::HashedPath) req.path.validate();
    return req;
}

FingerprintSet fingerprint_documents(const std::vector<docstore::Document>& docs, const FingerprintRequest& req) {
    FingerprintSet set;
    set.method = req.method;
    set.n_bits = req.method == fingerprint::Method::HashedPath ? req.path.n_bits
                                                               : static_cast<std::uint32_t>(fingerprint::kAtmoKeyCount);
    fingerprint::Fingerprint blank;
    blank.method = req.method;
    blank.n_bits = set.n_bits;
    blank.params = req.method == fingerprint::Method::HashedPath
                       ? std::map<std::string, std::string>{{"max_len", std::to_string(req.path.max_len)},
                                                            {"n_bits", std::to_string(req.path.n_bits)}}
                       : std::map<std::string, std::string>{{"version", std::string(fingerprint::kAtmoKeysVersion)}};
    for (std::size_t i = 0; i < docs.size(); ++i) {
        set.ids.push_back(docs[i].id);
        set.smiles.push_back(docs[i].smiles());
        try {
            set.fps.push_back(fingerprint::fingerprint_smiles(set.smiles.back(), req.method, req.path));
        } catch (const Error& e) {
            set.fps.push_back(blank);
            set.failures.push_back({i, e.code(), e.what()});
        }
    }
    return set;
}

json fingerprint_stats_json(const FingerprintSet& set) {
    json failures = json::array();
    for (const auto& f : set.failures) {
        failures.push_back({{"index", f.index}, {"id", set.ids[f.index]}, {"code", f.code}, {"message", f.message}});
    }
    json density = {{"mean", nullptr}, {"min", nullptr}, {"max", nullptr}};
    if (!set.fps.empty() && set.n_bits > 0) {
        double sum = 0.0, lo = 1.0, hi = 0.0;
        for (const auto& fp : set.fps) {
            const double d = static_cast<double>(fp.bits.size()) / set.n_bits;
            sum += d;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        density = {{"mean", sum / static_cast<double>(set.fps.size())}, {"min", lo}, {"max", hi}};
    }
    const auto params = set.fps.empty() ? std::map<std::string, std::string>{} : set.fps.front().params;
    return {{"dimension", set.n_bits}, {"method", fingerprint::method_name(set.method)}, {"params", params},
            {"count", set.size()},     {"failures", failures},                          {"density", density}};
}

void write_fingerprints_jsonl(std::ostream& out, const FingerprintSet& set) {
    std::size_t next_failure = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& fp = set.fps[i];
        json line = {{"id", set.ids[i]},   {"smiles", set.smiles[i]}, {"method", fingerprint::method_name(fp.method)},
                     {"n_bits", fp.n_bits}, {"params", fp.params},     {"bits", fp.bits}};
        if (next_failure < set.failures.size() && set.failures[next_failure].index == i) {
            line["error"] = {{"code", set.failures[next_failure].code}, {"message", set.failures[next_failure].message}};
            ++next_failure;
        }
        out << line.dump() << '\n';
    }
}

FingerprintSet read_fingerprints_jsonl(std::istream& in) {
    FingerprintSet set;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto bad = [&](const std::string& why) {
            return InvalidArgument("invalid_fingerprints", "line " + std::to_string(line_no) + ": " + why);
        };
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw bad(e.what());
        }
        if (!j.is_object() || !j.contains("bits") || !j["bits"].is_array() || !j.contains("n_bits") ||
            !j["n_bits"].is_number_unsigned() || !j.contains("method")) {
            throw bad("expected {id, smiles, method, n_bits, bits}");
        }
        fingerprint::Fingerprint fp;
        try {
            fp.method = fingerprint::method_from_name(j["method"].get<std::string>());
            fp.n_bits = j["n_bits"].get<std::uint32_t>();
            fp.bits = j["bits"].get<std::vector<std::uint32_t>>();
            if (j.contains("params")) fp.params = j["params"].get<std::map<std::string, std::string>>();
        } catch (const json::exception& e) {
            throw bad(e.what());
        }
        for (std::size_t b = 0; b < fp.bits.size(); ++b) {
            if (fp.bits[b] >= fp.n_bits || (b > 0 && fp.bits[b] <= fp.bits[b - 1])) {
                throw bad("bits must be ascending positions below n_bits");
            }
        }
        if (set.fps.empty()) {
            set.method = fp.method;
            set.n_bits = fp.n_bits;
        } else if (fp.n_bits != set.n_bits || fp.method != set.method) {
            throw bad("all fingerprints must share method and length");
        }
        set.ids.push_back(j.value("id", "doc-" + std::to_string(set.fps.size() + 1)));
        set.smiles.push_back(j.value("smiles", ""));
        if (j.contains("error") && j["error"].is_object()) {
            set.failures.push_back({set.fps.size(), j["error"].value("code", ""), j["error"].value("message", "")});
        }
        set.fps.push_back(std::move(fp));
    }
    return set;
}

Eigen::MatrixXd dense_bits(const FingerprintSet& set) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(set.size()), set.n_bits);
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (auto b : set.fps[i].bits) x(static_cast<Eigen::Index>(i), b) = 1.0;
    }
    return x;
}

ClusterRequest cluster_request_from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("invalid_params", "cluster request must be an object");
    ClusterRequest req;
    const std::string algo = string_or(j, "algo", "kmeans", "invalid_params");
    if (algo == "kmeans") {
        req.algo = ClusterRequest::Algo::Kmeans;
    } else if (algo == "agglomerative") {
        req.algo = ClusterRequest::Algo::Agglomerative;
    } else {
        throw InvalidArgument("unknown_algo", "unknown clustering algorithm '" + algo + "'");
    }
    if (!j.contains("k")) throw InvalidArgument("invalid_k", "k is required");
    const long long k = integer_or(j, "k", 0, "invalid_k");
    if (k < 1 || k > 1000000) throw InvalidArgument("invalid_k", "k must be a positive integer");
    req.k = static_cast<int>(k);
    req.linkage = cluster::linkage_from_name(string_or(j, "linkage", "ward", "invalid_params"));
    const long long seed = integer_or(j, "seed", 0, "invalid_seed");
    if (seed < 0) throw InvalidArgument("invalid_seed", "seed must be non-negative");
    req.seed = static_cast<std::uint64_t>(seed);
    return req;
}

ClusterResult run_cluster(const Eigen::MatrixXd& vectors, const ClusterRequest& req) {
    ClusterResult r;
    r.clustering = req.algo == ClusterRequest::Algo::Kmeans ? cluster::kmeans(vectors, req.k, req.seed)
                                                            : cluster::agglomerative(vectors, req.k, req.linkage);
    int distinct = 0;
    std::vector<bool> seen(static_cast<std::size_t>(r.clustering.k), false);
    for (int l : r.clustering.labels) {
        if (!seen[static_cast<std::size_t>(l)]) {
            seen[static_cast<std::size_t>(l)] = true;
            ++distinct;
        }
    }
    if (distinct >= 2 && distinct <= vectors.rows() - 1) r.validity = cluster::validity(vectors, r.clustering.labels);
    return r;
}

json to_json(const ClusterResult& r, const ClusterRequest& req) {
    json j = {{"algo", req.algo == ClusterRequest::Algo::Kmeans ? "kmeans" : "agglomerative"},
              {"k", r.clustering.k},
              {"labels", r.clustering.labels},
              {"validity", r.validity ? to_json(*r.validity) : json(nullptr)}};
    if (req.algo == ClusterRequest::Algo::Kmeans) {
        j["seed"] = req.seed;
        j["inertia"] = r.clustering.inertia;
        j["iterations"] = r.clustering.inertia_history.size();
    } else {
        j["linkage"] = cluster::linkage_name(req.linkage);
    }
    return j;
}

EmbedRequest embed_request_from_json(const json& j) {
    if (!j.is_object()) throw InvalidArgument("invalid_params", "embed request must be an object");
    EmbedRequest req;
    req.method = embed::method_from_name(string_or(j, "method", "kpca", "invalid_params"));
    if (j.contains("kernel") && !j["kernel"].is_null()) {
        const json& k = j["kernel"];
        if (k.is_string()) {
            req.kernel.kind = embed::kernel_from_name(k.get<std::string>());
        } else if (k.is_object()) {
            req.kernel.kind = embed::kernel_from_name(string_or(k, "kind", "rbf", "invalid_params"));
            if (k.contains("gamma") && !k["gamma"].is_null()) req.kernel.gamma = number_or(k, "gamma", 0.0, "invalid_gamma");
        } else {
            throw InvalidArgument("invalid_params", "kernel must be a name or {kind, gamma}");
        }
    }
    const json params = j.contains("params") && j["params"].is_object() ? j["params"] : json::object();
    req.tsne.perplexity = number_or(params, "perplexity", req.tsne.perplexity, "invalid_perplexity");
    req.tsne.iters = static_cast<int>(integer_or(params, "iters", req.tsne.iters, "invalid_tsne_params"));
    req.tsne.learning_rate = number_or(params, "learning_rate", req.tsne.learning_rate, "invalid_tsne_params");
    const long long seed = integer_or(params, "seed", static_cast<long long>(req.tsne.seed), "invalid_seed");
    if (seed < 0) throw InvalidArgument("invalid_seed", "seed must be non-negative");
    req.tsne.seed = static_cast<std::uint64_t>(seed);
    req.k_neighbors = static_cast<int>(integer_or(params, "k_neighbors", req.k_neighbors, "invalid_k"));
    if (params.contains("quality_k")) req.quality_k = static_cast<int>(integer_or(params, "quality_k", 0, "invalid_k"));
    if (j.contains("constraints")) req.constraints = constraints_from_json(j["constraints"]);
    return req;
}

std::optional<quality::QualityReport> score(const Eigen::MatrixXd& vectors, const embed::Coords& coords,
                                            std::optional<int> k) {
    if (k) return quality::embedding_quality(vectors, coords, *k);
    const int fit = std::min(kDefaultQualityK, quality::max_quality_k(vectors.rows()));
    if (fit < 1) return std::nullopt;
    return quality::embedding_quality(vectors, coords, fit);
}

EmbedResult run_embed(const Eigen::MatrixXd& vectors, const EmbedRequest& req) {
    EmbedResult r;
    const auto to_unit = [](embed::Embedding e) {
        e.coords = embed::Frame::fit(e.coords).to_unit(e.coords);
        return e;
    };
    const auto kernel = [&] {
        auto k = embed::center(embed::build_kernel(vectors, req.kernel));
        return k;
    };
    const auto tag_kernel = [&](embed::Embedding& e) {
        e.provenance["kernel"] = std::string(embed::kernel_name(req.kernel.kind));
        if (req.kernel.gamma) e.provenance["gamma"] = std::to_string(*req.kernel.gamma);
    };
    switch (req.method) {
        case embed::Method::Pca:
            r.embedding = to_unit(embed::pca(vectors));
            break;
        case embed::Method::Kpca:
            r.embedding = to_unit(embed::kpca(kernel()));
            tag_kernel(r.embedding);
            break;
        case embed::Method::Ckpca: {
            r.state.emplace(kernel(), req.constraints);
            r.embedding = r.state->solve();
            tag_kernel(r.embedding);
            break;
        }
        case embed::Method::Tsne:
            r.embedding = to_unit(embed::tsne(vectors, req.tsne).embedding);
            break;
        case embed::Method::Lsp: {
            std::vector<embed::LspControl> controls;
            for (const auto& cp : req.constraints.control_points) controls.push_back({cp.index, cp.x, cp.y});
            r.embedding = embed::lsp(vectors, controls, req.k_neighbors);
            break;
        }
    }
    r.quality = score(vectors, r.embedding.coords, req.quality_k);
    return r;
}

}  // namespace moleda::service
