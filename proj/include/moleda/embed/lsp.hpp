#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "moleda/embed/embedding.hpp"

namespace moleda::embed {

struct LspControl {
    std::size_t index = 0;
    double x = 0.0;
    double y = 0.0;
};

inline constexpr double kLspAnchorWeight = 10.0;

/// k nearest neighbours of every row (Euclidean, ties broken by index, self excluded).
std::vector<std::vector<std::size_t>> knn_graph(const Eigen::MatrixXd& vectors, int k);

/// Least Square Projection. Every free point contributes the row
/// x_i − mean(x_N(i)) = 0 and every control the anchor row κ·x_c = κ·target
/// (κ = 10); the stacked system is solved per axis by sparse QR.
Embedding lsp(const Eigen::MatrixXd& vectors, std::span<const LspControl> controls, int k_neighbors = 10);

}  // namespace moleda::embed
