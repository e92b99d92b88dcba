#include "moleda/embed/tsne.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "moleda/error.hpp"

namespace moleda::embed {

namespace {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
    const Eigen::VectorXd sq = x.rowwise().squaredNorm();
    Eigen::MatrixXd d = (-2.0 * x * x.transpose()).colwise() + sq;
    d.rowwise() += sq.transpose();
    d = d.cwiseMax(0.0);
    d.diagonal().setZero();
    return d;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
    const Eigen::Index n = y.rows();
    Eigen::MatrixXd num(n, n);
    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            num(i, j) = i == j ? 0.0 : 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
            z += num(i, j);
        }
    }
    double kl = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pij = std::max(p(i, j), 1e-12);
            const double qij = std::max(num(i, j) / z, 1e-12);
            kl += pij * std::log(pij / qij);
        }
    }
    return kl;
}

}  // namespace

Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& sq_distances, double perplexity) {
    const Eigen::Index n = sq_distances.rows();
    const double target = std::log(perplexity);
    constexpr double tol = 1e-5;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double beta = 1.0;
        double beta_min = -std::numeric_limits<double>::infinity();
        double beta_max = std::numeric_limits<double>::infinity();
        Eigen::VectorXd row(n);
        for (int it = 0; it < 200; ++it) {
            double sum = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                row(j) = j == i ? 0.0 : std::exp(-beta * sq_distances(i, j));
                sum += row(j);
            }
            if (sum <= std::numeric_limits<double>::min()) sum = std::numeric_limits<double>::min();
            double weighted = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) weighted += beta * sq_distances(i, j) * row(j);
            const double entropy = std::log(sum) + weighted / sum;
            row /= sum;
            const double diff = entropy - target;
            if (std::abs(diff) < tol) break;
            if (diff > 0.0) {
                beta_min = beta;
                beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
            } else {
                beta_max = beta;
                beta = std::isinf(beta_min) ? beta / 2.0 : 0.5 * (beta + beta_min);
            }
        }
        p.row(i) = row.transpose();
    }
    return p;
}

TsneResult tsne(const Eigen::MatrixXd& vectors, const TsneParams& params) {
    const Eigen::Index n = vectors.rows();
    if (n < 4) throw InvalidArgument("too_few_points", "t-SNE needs at least 4 points");
    if (n > 5000) throw InvalidArgument("too_many_points", "exact t-SNE is limited to 5000 points");
    if (!(params.perplexity > 0.0)) throw InvalidArgument("invalid_perplexity", "perplexity must be positive");
    if (3.0 * params.perplexity >= static_cast<double>(n)) {
        throw InvalidArgument("perplexity_too_large", "perplexity must be below n/3 (n = " + std::to_string(n) + ")");
    }
    if (params.iters < 1 || !(params.learning_rate > 0.0)) {
        throw InvalidArgument("invalid_tsne_params", "iters and learning_rate must be positive");
    }
    if (!vectors.allFinite()) throw InvalidArgument("non_finite_input", "feature vectors contain NaN or infinity");

    Eigen::MatrixXd p = conditional_affinities(squared_distances(vectors), params.perplexity);
    p = p + p.transpose().eval();
    p /= p.sum();
    const Eigen::MatrixXd p_plain = p;
    p *= params.early_exaggeration;

    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> normal(0.0, 1e-4);
    Eigen::MatrixXd y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int d = 0; d < 2; ++d) y(i, d) = normal(rng);
    }
    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
    Eigen::MatrixXd grad(n, 2);
    Eigen::MatrixXd num(n, n);

    TsneResult result;
    for (int iter = 0; iter < params.iters; ++iter) {
        if (iter == params.exaggeration_iters) {
            p = p_plain;
            result.kl_after_exaggeration = kl_divergence(p_plain, y);
        }
        const double momentum = iter < params.exaggeration_iters ? 0.5 : 0.8;

        double z = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            num(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double v = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
                num(i, j) = num(j, i) = v;
                z += 2.0 * v;
            }
        }
        grad.setZero();
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double mult = (p(i, j) - num(i, j) / z) * num(i, j);
                grad.row(i) += mult * (y.row(i) - y.row(j));
            }
        }
        grad *= 4.0;

        for (Eigen::Index i = 0; i < n; ++i) {
            for (int d = 0; d < 2; ++d) {
                const bool same_sign = (grad(i, d) > 0.0) == (velocity(i, d) > 0.0);
                gains(i, d) = same_sign ? gains(i, d) * 0.8 : gains(i, d) + 0.2;
                gains(i, d) = std::max(gains(i, d), 0.01);
                velocity(i, d) = momentum * velocity(i, d) - params.learning_rate * gains(i, d) * grad(i, d);
                y(i, d) += velocity(i, d);
            }
        }
        y.rowwise() -= y.colwise().mean();
    }
    if (params.iters <= params.exaggeration_iters) result.kl_after_exaggeration = kl_divergence(p_plain, y);
    result.kl_final = kl_divergence(p_plain, y);
    if (!y.allFinite()) throw NumericalError("tsne_diverged", "t-SNE produced non-finite coordinates");

    result.embedding.method = Method::Tsne;
    result.embedding.coords = y;
    result.embedding.provenance = {{"method", "tsne"},
                                   {"perplexity", std::to_string(params.perplexity)},
                                   {"iters", std::to_string(params.iters)},
                                   {"learning_rate", std::to_string(params.learning_rate)},
                                   {"seed", std::to_string(params.seed)}};
    return result;
}

}  // namespace moleda::embed
