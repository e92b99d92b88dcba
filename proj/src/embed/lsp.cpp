#include "moleda/embed/lsp.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseQR>
#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "moleda/error.hpp"

namespace moleda::embed {

std::vector<std::vector<std::size_t>> knn_graph(const Eigen::MatrixXd& vectors, int k) {
    const auto n = static_cast<std::size_t>(vectors.rows());
    if (k < 1 || static_cast<std::size_t>(k) >= n) {
        throw InvalidArgument("invalid_k", "k_neighbors must be in [1, n)");
    }
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::size_t> order;
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dist[j] = (vectors.row(static_cast<Eigen::Index>(i)) - vectors.row(static_cast<Eigen::Index>(j))).squaredNorm();
        }
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) order.push_back(j);
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](std::size_t a, std::size_t b) {
            return dist[a] != dist[b] ? dist[a] < dist[b] : a < b;
        });
        out[i].assign(order.begin(), order.begin() + k);
    }
    return out;
}

Embedding lsp(const Eigen::MatrixXd& vectors, std::span<const LspControl> controls, int k_neighbors) {
    const auto n = static_cast<std::size_t>(vectors.rows());
    if (controls.size() < 3) throw InvalidArgument("too_few_controls", "LSP needs at least 3 control points");
    std::vector<bool> is_control(n, false);
    for (const auto& c : controls) {
        if (c.index >= n) throw InvalidArgument("invalid_control", "control index out of range");
        if (is_control[c.index]) throw InvalidArgument("invalid_control", "duplicate control index");
        is_control[c.index] = true;
    }
    const auto neighbors = knn_graph(vectors, k_neighbors);

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> entries;
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_control[i]) continue;
        entries.emplace_back(row, static_cast<Eigen::Index>(i), 1.0);
        const double w = -1.0 / static_cast<double>(neighbors[i].size());
        for (std::size_t j : neighbors[i]) entries.emplace_back(row, static_cast<Eigen::Index>(j), w);
        ++row;
    }
    const Eigen::Index laplacian_rows = row;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(laplacian_rows + static_cast<Eigen::Index>(controls.size()), 2);
    for (const auto& c : controls) {
        entries.emplace_back(row, static_cast<Eigen::Index>(c.index), kLspAnchorWeight);
        rhs(row, 0) = kLspAnchorWeight * c.x;
        rhs(row, 1) = kLspAnchorWeight * c.y;
        ++row;
    }
    Eigen::SparseMatrix<double> system(row, static_cast<Eigen::Index>(n));
    system.setFromTriplets(entries.begin(), entries.end());
    system.makeCompressed();

    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr(system);
    if (qr.info() != Eigen::Success) throw NumericalError("singular_system", "LSP factorisation failed");
    Eigen::MatrixXd solution = qr.solve(rhs);
    if (qr.info() != Eigen::Success || !solution.allFinite()) {
        throw NumericalError("singular_system", "LSP solve failed");
    }

    Embedding e;
    e.method = Method::Lsp;
    e.coords = solution;
    e.provenance = {{"method", "lsp"}, {"k_neighbors", std::to_string(k_neighbors)},
                    {"controls", std::to_string(controls.size())}};
    return e;
}

}  // namespace moleda::embed
