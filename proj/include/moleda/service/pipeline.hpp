#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moleda/cluster.hpp"
#include "moleda/docstore/document.hpp"
#include "moleda/embed/ckpca.hpp"
#include "moleda/embed/kernel.hpp"
#include "moleda/embed/tsne.hpp"
#include "moleda/fingerprint.hpp"
#include "moleda/quality.hpp"
#include "moleda/service/codec.hpp"

namespace moleda::service {

struct FingerprintFailure {
    std::size_t index = 0;
    std::string code;
    std::string message;
};

/// Fingerprints of a working set, row-aligned with its molecules. A molecule
/// whose SMILES cannot be parsed keeps an all-zero fingerprint and is listed
/// in `failures`.
struct FingerprintSet {
    std::vector<std::string> ids;
    std::vector<std::string> smiles;
    std::vector<fingerprint::Fingerprint> fps;
    std::vector<FingerprintFailure> failures;
    fingerprint::Method method = fingerprint::Method::HashedPath;
    std::uint32_t n_bits = 0;

    std::size_t size() const noexcept { return fps.size(); }
};

struct FingerprintRequest {
    fingerprint::Method method = fingerprint::Method::HashedPath;
    fingerprint::PathConfig path;
};
/// {method, params: {max_len, n_bits}}; every key optional.
FingerprintRequest fingerprint_request_from_json(const json& j);

FingerprintSet fingerprint_documents(const std::vector<docstore::Document>& docs, const FingerprintRequest& req);

/// {dimension, method, params, count, failures, density: {mean, min, max}} where
/// density is the fraction of set bits per molecule.
json fingerprint_stats_json(const FingerprintSet& set);

/// One JSON object per line: {id, smiles, method, n_bits, params, bits[, error]}.
void write_fingerprints_jsonl(std::ostream& out, const FingerprintSet& set);
FingerprintSet read_fingerprints_jsonl(std::istream& in);

/// n x n_bits matrix of 0/1 entries.
Eigen::MatrixXd dense_bits(const FingerprintSet& set);

struct ClusterRequest {
    enum class Algo { Kmeans, Agglomerative };
    Algo algo = Algo::Kmeans;
    int k = 2;
    cluster::Linkage linkage = cluster::Linkage::Ward;
    std::uint64_t seed = 0;
};
/// {algo, k, linkage?, seed?}
ClusterRequest cluster_request_from_json(const json& j);

struct ClusterResult {
    cluster::Clustering clustering;
    /// Absent when the labeling has fewer than 2 or more than n-1 clusters.
    std::optional<cluster::ValidityReport> validity;
};
ClusterResult run_cluster(const Eigen::MatrixXd& vectors, const ClusterRequest& req);
/// {algo, k, labels, validity, seed, linkage?, inertia?, iterations?}
json to_json(const ClusterResult& r, const ClusterRequest& req);

inline constexpr int kDefaultQualityK = 10;

struct EmbedRequest {
    embed::Method method = embed::Method::Kpca;
    embed::KernelSpec kernel;
    embed::ConstraintSet constraints;
    embed::TsneParams tsne;
    int k_neighbors = 10;
    /// Neighbourhood size of the QualityReport; clamped to what n allows when unset.
    std::optional<int> quality_k;
};
/// {method, kernel: name | {kind, gamma}, params: {perplexity, iters, learning_rate, seed,
/// k_neighbors, quality_k}, constraints}
EmbedRequest embed_request_from_json(const json& j);

struct EmbedResult {
    embed::Embedding embedding;
    std::optional<quality::QualityReport> quality;
    /// Live solver state for ckpca.
    std::optional<embed::CkpcaState> state;
};

/// Coordinates are reported in embedding units: pca, kpca and tsne output is
/// mapped to the unit frame, ckpca is in its own frame, lsp keeps the units
/// of its control targets.
EmbedResult run_embed(const Eigen::MatrixXd& vectors, const EmbedRequest& req);

/// Quality with the request's k, or the largest admissible k up to 10; empty if n is too small.
std::optional<quality::QualityReport> score(const Eigen::MatrixXd& vectors, const embed::Coords& coords,
                                            std::optional<int> k);

}  // namespace moleda::service
