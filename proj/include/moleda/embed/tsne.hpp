#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "moleda/embed/embedding.hpp"

namespace moleda::embed {

struct TsneParams {
    double perplexity = 30.0;
    int iters = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 250;
    std::uint64_t seed = 42;
};

struct TsneResult {
    Embedding embedding;
    /// KL(P‖Q) with the un-exaggerated P, right after the exaggeration phase.
    double kl_after_exaggeration = 0.0;
    double kl_final = 0.0;
};

/// Exact O(n²) t-SNE with Euclidean input affinities.
TsneResult tsne(const Eigen::MatrixXd& vectors, const TsneParams& params = {});

/// Row-normalised Gaussian affinities whose entropy matches log(perplexity)
/// to 1e-5 (binary search on the precision of each row).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& sq_distances, double perplexity);

}  // namespace moleda::embed
