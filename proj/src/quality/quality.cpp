#include "moleda/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "moleda/error.hpp"

namespace moleda::quality {

namespace {

Eigen::MatrixXd pairwise(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        d(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < n; ++i) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).norm();
    }
    return d;
}

/// Other points ordered by distance from i, ties by index.
std::vector<Eigen::Index> ordering(const Eigen::MatrixXd& d, Eigen::Index i) {
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(d.rows() - 1));
    for (Eigen::Index j = 0; j < d.rows(); ++j) {
        if (j != i) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return d(i, a) != d(i, b) ? d(i, a) < d(i, b) : a < b;
    });
    return order;
}

/// 1-based ranks, ties receiving the mean of the ranks they span.
std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t s = 0; s < idx.size();) {
        std::size_t e = s + 1;
        while (e < idx.size() && v[idx[e]] == v[idx[s]]) ++e;
        const double mean_rank = 0.5 * static_cast<double>(s + 1 + e);
        for (std::size_t t = s; t < e; ++t) ranks[idx[t]] = mean_rank;
        s = e;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

int max_quality_k(Eigen::Index n) { return n < 4 ? 0 : static_cast<int>((n - 2) / 2); }

QualityReport embedding_quality(const Eigen::MatrixXd& hd, const Eigen::MatrixXd& ld, int k) {
    const Eigen::Index n = hd.rows();
    if (ld.rows() != n) throw InvalidArgument("misaligned_inputs", "hd and ld have different point counts");
    if (k < 1) throw InvalidArgument("invalid_k", "k must be at least 1");
    if (n < 2 * static_cast<Eigen::Index>(k) + 2) {
        throw InvalidArgument("too_few_points", "quality metrics need n >= 2k+2 (n = " + std::to_string(n) +
                                                    ", k = " + std::to_string(k) + ")");
    }
    if (!hd.allFinite() || !ld.allFinite()) throw InvalidArgument("non_finite_input", "inputs contain NaN or infinity");

    const Eigen::MatrixXd dh = pairwise(hd);
    const Eigen::MatrixXd dl = pairwise(ld);
    const auto un = static_cast<std::size_t>(n);
    const auto uk = static_cast<std::size_t>(k);

    long long penalty = 0;
    long long shared = 0;
    std::vector<int> hd_rank(un);
    std::vector<bool> in_hd(un);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ho = ordering(dh, i);
        const auto lo = ordering(dl, i);
        std::fill(in_hd.begin(), in_hd.end(), false);
        for (std::size_t r = 0; r < ho.size(); ++r) {
            hd_rank[static_cast<std::size_t>(ho[r])] = static_cast<int>(r + 1);
            if (r < uk) in_hd[static_cast<std::size_t>(ho[r])] = true;
        }
        for (std::size_t r = 0; r < uk; ++r) {
            const auto j = static_cast<std::size_t>(lo[r]);
            if (in_hd[j]) {
                ++shared;
            } else {
                penalty += hd_rank[j] - k;
            }
        }
    }

    QualityReport q;
    q.k_used = k;
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    q.trustworthiness = 1.0 - (2.0 * static_cast<double>(penalty)) / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0));
    q.knn_preservation = static_cast<double>(shared) / (nn * kk);

    std::vector<double> xs, ys;
    xs.reserve(un * (un - 1) / 2);
    ys.reserve(un * (un - 1) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            xs.push_back(dh(i, j));
            ys.push_back(dl(i, j));
        }
    }
    q.shepard_spearman = pearson(average_ranks(xs), average_ranks(ys));

    double cross = 0.0, low_sq = 0.0, high_sq = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        cross += xs[t] * ys[t];
        low_sq += ys[t] * ys[t];
        high_sq += xs[t] * xs[t];
    }
    const double beta = low_sq > 0.0 ? cross / low_sq : 0.0;
    double residual = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const double diff = xs[t] - beta * ys[t];
        residual += diff * diff;
    }
    q.normalized_stress = high_sq > 0.0 ? std::sqrt(residual / high_sq) : 0.0;
    return q;
}

}  // namespace moleda::quality
