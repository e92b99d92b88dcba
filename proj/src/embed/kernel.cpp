#include "moleda/embed/kernel.hpp"

#include <cmath>
#include <string>

#include "moleda/error.hpp"

namespace moleda::embed {

std::string_view kernel_name(KernelKind k) noexcept {
    switch (k) {
        case KernelKind::Linear: return "linear";
        case KernelKind::Rbf: return "rbf";
        case KernelKind::Tanimoto: return "tanimoto";
    }
    return "rbf";
}

KernelKind kernel_from_name(std::string_view name) {
    if (name == "linear") return KernelKind::Linear;
    if (name == "rbf") return KernelKind::Rbf;
    if (name == "tanimoto") return KernelKind::Tanimoto;
    throw InvalidArgument("unknown_kernel", "unknown kernel '" + std::string(name) + "'");
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& vectors) {
    const std::size_t d = vectors.empty() ? 0 : vectors.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(vectors.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != d) {
            throw InvalidArgument("mixed_lengths", "vector " + std::to_string(i) + " has length " +
                                                       std::to_string(vectors[i].size()) + ", expected " +
                                                       std::to_string(d));
        }
        for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];
    }
    return m;
}

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(x.rows(), x.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(x);
    return g.selfadjointView<Eigen::Lower>();
}

}  // namespace

KernelMatrix build_kernel(const Eigen::MatrixXd& x, const KernelSpec& spec) {
    const Eigen::Index n = x.rows();
    if (n < 2) throw InvalidArgument("too_few_points", "a kernel needs at least 2 vectors");
    if (!x.allFinite()) throw InvalidArgument("non_finite_input", "feature vectors contain NaN or infinity");

    KernelMatrix k;
    Eigen::MatrixXd dots = gram(x);
    switch (spec.kind) {
        case KernelKind::Linear:
            k.values = std::move(dots);
            break;
        case KernelKind::Rbf: {
            const double gamma = spec.gamma.value_or(x.cols() > 0 ? 1.0 / static_cast<double>(x.cols()) : 1.0);
            if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("invalid_gamma", "gamma must be positive");
            const Eigen::VectorXd sq = dots.diagonal();
            k.values.resize(n, n);
            for (Eigen::Index j = 0; j < n; ++j) {
                k.values(j, j) = 1.0;
                for (Eigen::Index i = j + 1; i < n; ++i) {
                    const double d2 = std::max(0.0, sq(i) + sq(j) - 2.0 * dots(i, j));
                    k.values(i, j) = k.values(j, i) = std::exp(-gamma * d2);
                }
            }
            break;
        }
        case KernelKind::Tanimoto: {
            if (!((x.array() == 0.0) || (x.array() == 1.0)).all()) {
                throw InvalidArgument("tanimoto_on_dense", "the tanimoto kernel needs 0/1 bit vectors");
            }
            const Eigen::VectorXd pop = dots.diagonal();
            k.values.resize(n, n);
            for (Eigen::Index j = 0; j < n; ++j) {
                k.values(j, j) = 1.0;
                for (Eigen::Index i = j + 1; i < n; ++i) {
                    const double unite = pop(i) + pop(j) - dots(i, j);
                    k.values(i, j) = k.values(j, i) = unite > 0.0 ? dots(i, j) / unite : 1.0;
                }
            }
            break;
        }
    }
    return k;
}

KernelMatrix center(const KernelMatrix& k) {
    if (k.centered) throw InvalidArgument("already_centered", "kernel matrix is already centred");
    const Eigen::Index n = k.n();
    const Eigen::VectorXd row_mean = k.values.rowwise().mean();
    const double total_mean = row_mean.mean();
    KernelMatrix out;
    out.values.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out.values(i, j) = k.values(i, j) - row_mean(i) - row_mean(j) + total_mean;
        }
    }
    // Exact symmetry regardless of summation order.
    out.values = (0.5 * (out.values + out.values.transpose())).eval();
    out.centered = true;
    return out;
}

}  // namespace moleda::embed
