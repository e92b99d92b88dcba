#include "moleda/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "moleda/error.hpp"

namespace moleda::cluster {

std::string_view linkage_name(Linkage l) noexcept {
    switch (l) {
        case Linkage::Single: return "single";
        case Linkage::Average: return "average";
        case Linkage::Ward: return "ward";
    }
    return "ward";
}

Linkage linkage_from_name(std::string_view name) {
    if (name == "single") return Linkage::Single;
    if (name == "average") return Linkage::Average;
    if (name == "ward") return Linkage::Ward;
    throw InvalidArgument("unknown_linkage", "unknown linkage '" + std::string(name) + "'");
}

int compact_labels(std::vector<int>& labels) {
    std::map<int, int> remap;
    for (int& l : labels) {
        auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
        l = it->second;
    }
    return static_cast<int>(remap.size());
}

namespace {

void check_k(Eigen::Index n, int k, int min_k) {
    if (k < min_k) throw InvalidArgument("invalid_k", "k must be at least " + std::to_string(min_k));
    if (k > n) {
        throw InvalidArgument("k_too_large", "k = " + std::to_string(k) + " exceeds the number of points (" +
                                                 std::to_string(n) + ")");
    }
}

/// Uniform double in [0, 1) from the top 53 bits.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<int> assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, std::vector<double>* cost) {
    const Eigen::Index n = x.rows();
    std::vector<int> labels(static_cast<std::size_t>(n));
    if (cost) cost->assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (Eigen::Index c = 0; c < centers.rows(); ++c) {
            const double d = (x.row(i) - centers.row(c)).squaredNorm();
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[static_cast<std::size_t>(i)] = arg;
        if (cost) (*cost)[static_cast<std::size_t>(i)] = best;
    }
    return labels;
}

double inertia_of(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers, const std::vector<int>& labels) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) total += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    return total;
}

Eigen::MatrixXd means(const Eigen::MatrixXd& x, const std::vector<int>& labels, int k, std::vector<int>& sizes) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, x.cols());
    sizes.assign(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int l = labels[static_cast<std::size_t>(i)];
        c.row(l) += x.row(i);
        ++sizes[static_cast<std::size_t>(l)];
    }
    for (int l = 0; l < k; ++l) {
        if (sizes[static_cast<std::size_t>(l)] > 0) c.row(l) /= sizes[static_cast<std::size_t>(l)];
    }
    return c;
}

}  // namespace

Clustering kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    check_k(n, k, 1);
    if (!x.allFinite()) throw InvalidArgument("non_finite_input", "feature vectors contain NaN or infinity");

    std::mt19937_64 rng(seed);
    Eigen::MatrixXd centers(k, x.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    std::vector<double> nearest(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
    for (int c = 0; c < k; ++c) {
        std::size_t pick = first;
        if (c > 0) {
            double total = 0.0;
            for (double d : nearest) total += d;
            if (total > 0.0) {
                const double u = unit(rng) * total;
                double acc = 0.0;
                pick = static_cast<std::size_t>(n);
                for (std::size_t i = 0; i < nearest.size(); ++i) {
                    if (nearest[i] <= 0.0) continue;
                    acc += nearest[i];
                    pick = i;
                    if (acc > u) break;
                }
            } else {
                pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
            }
        }
        chosen[pick] = true;
        centers.row(c) = x.row(static_cast<Eigen::Index>(pick));
        for (Eigen::Index i = 0; i < n; ++i) {
            nearest[static_cast<std::size_t>(i)] =
                std::min(nearest[static_cast<std::size_t>(i)], (x.row(i) - centers.row(c)).squaredNorm());
        }
    }

    Clustering out;
    out.k = k;
    out.seed = seed;
    std::vector<int> labels = assign(x, centers, nullptr);
    std::vector<int> sizes;
    for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
        centers = means(x, labels, k, sizes);
        for (int l = 0; l < k; ++l) {
            if (sizes[static_cast<std::size_t>(l)] > 0) continue;
            // Reseed an empty cluster at the point farthest from its centre,
            // taken from a cluster that keeps at least one member.
            double worst = -1.0;
            Eigen::Index arg = -1;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int owner = labels[static_cast<std::size_t>(i)];
                if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
                const double d = (x.row(i) - centers.row(owner)).squaredNorm();
                if (d > worst) {
                    worst = d;
                    arg = i;
                }
            }
            if (arg < 0) break;
            --sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(arg)])];
            labels[static_cast<std::size_t>(arg)] = l;
            centers = means(x, labels, k, sizes);
        }
        out.inertia_history.push_back(inertia_of(x, centers, labels));
        std::vector<int> next = assign(x, centers, nullptr);
        if (next == labels) break;
        labels = std::move(next);
    }
    out.labels = std::move(labels);
    out.centers = centers;
    out.inertia = inertia_of(x, centers, out.labels);
    return out;
}

Clustering agglomerative(const Eigen::MatrixXd& x, int k, Linkage linkage) {
    const Eigen::Index n = x.rows();
    check_k(n, k, 2);
    if (!x.allFinite()) throw InvalidArgument("non_finite_input", "feature vectors contain NaN or infinity");
    const auto un = static_cast<std::size_t>(n);

    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        dist(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double sq = (x.row(i) - x.row(j)).squaredNorm();
            dist(i, j) = dist(j, i) = linkage == Linkage::Ward ? 0.5 * sq : std::sqrt(sq);
        }
    }

    std::vector<bool> active(un, true);
    std::vector<double> size(un, 1.0);
    std::vector<std::size_t> parent(un);
    for (std::size_t i = 0; i < un; ++i) parent[i] = i;

    // For each active i: nearest active j > i (ties to the smaller j).
    std::vector<std::size_t> nn(un, un);
    std::vector<double> nd(un, std::numeric_limits<double>::infinity());
    const auto refresh = [&](std::size_t i) {
        nn[i] = un;
        nd[i] = std::numeric_limits<double>::infinity();
        for (std::size_t j = i + 1; j < un; ++j) {
            if (active[j] && dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < nd[i]) {
                nd[i] = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                nn[i] = j;
            }
        }
    };
    for (std::size_t i = 0; i < un; ++i) refresh(i);

    for (std::size_t clusters = un; clusters > static_cast<std::size_t>(k); --clusters) {
        std::size_t a = un;
        for (std::size_t i = 0; i < un; ++i) {
            if (active[i] && nn[i] < un && (a == un || nd[i] < nd[a])) a = i;
        }
        const std::size_t b = nn[a];
        const double dab = nd[a];
        const double na = size[a], nb = size[b];

        for (std::size_t m = 0; m < un; ++m) {
            if (!active[m] || m == a || m == b) continue;
            const auto im = static_cast<Eigen::Index>(m);
            const double dam = dist(static_cast<Eigen::Index>(a), im);
            const double dbm = dist(static_cast<Eigen::Index>(b), im);
            double merged = 0.0;
            switch (linkage) {
                case Linkage::Single: merged = std::min(dam, dbm); break;
                case Linkage::Average: merged = (na * dam + nb * dbm) / (na + nb); break;
                case Linkage::Ward: {
                    const double nm = size[m];
                    merged = ((nm + na) * dam + (nm + nb) * dbm - nm * dab) / (nm + na + nb);
                    break;
                }
            }
            dist(static_cast<Eigen::Index>(a), im) = dist(im, static_cast<Eigen::Index>(a)) = merged;
        }
        active[b] = false;
        size[a] = na + nb;
        parent[b] = a;

        for (std::size_t m = 0; m < un; ++m) {
            if (!active[m]) continue;
            if (m == a || nn[m] == a || nn[m] == b) {
                refresh(m);
            } else if (m < a) {
                const double dma = dist(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(a));
                if (dma < nd[m] || (dma == nd[m] && a < nn[m])) {
                    nd[m] = dma;
                    nn[m] = a;
                }
            }
        }
    }

    Clustering out;
    out.k = k;
    out.labels.resize(un);
    for (std::size_t i = 0; i < un; ++i) {
        std::size_t root = i;
        while (parent[root] != root) root = parent[root];
        out.labels[i] = static_cast<int>(root);
    }
    compact_labels(out.labels);
    std::vector<int> sizes;
    const Eigen::MatrixXd centers = means(x, out.labels, k, sizes);
    out.inertia = inertia_of(x, centers, out.labels);
    return out;
}

ValidityReport validity(const Eigen::MatrixXd& x, std::span<const int> raw_labels) {
    const Eigen::Index n = x.rows();
    if (static_cast<Eigen::Index>(raw_labels.size()) != n) {
        throw InvalidArgument("label_length_mismatch", "labels and vectors differ in length");
    }
    std::vector<int> labels(raw_labels.begin(), raw_labels.end());
    const int k = compact_labels(labels);
    if (k < 2 || k > n - 1) {
        throw InvalidArgument("degenerate_labeling", "validity indices need 2 <= k <= n-1 (k = " + std::to_string(k) + ")");
    }
    const auto uk = static_cast<std::size_t>(k);

    std::vector<int> sizes;
    const Eigen::MatrixXd centers = means(x, labels, k, sizes);
    const Eigen::RowVectorXd overall = x.colwise().mean();

    ValidityReport r;
    // Silhouette.
    std::vector<double> sums(uk);
    double s_total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = labels[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(own)] == 1) continue;
        std::fill(sums.begin(), sums.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) sums[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] += (x.row(i) - x.row(j)).norm();
        }
        const double a = sums[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < uk; ++c) {
            if (static_cast<int>(c) != own) b = std::min(b, sums[c] / sizes[c]);
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) s_total += (b - a) / denom;
    }
    r.silhouette = s_total / static_cast<double>(n);

    // Calinski-Harabasz.
    double between = 0.0, within = 0.0;
    for (std::size_t c = 0; c < uk; ++c) between += sizes[c] * (centers.row(static_cast<Eigen::Index>(c)) - overall).squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i) within += (x.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    r.calinski_harabasz = within == 0.0 ? 1.0 : (between / (k - 1)) / (within / static_cast<double>(n - k));

    // Davies-Bouldin.
    std::vector<double> scatter(uk, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto l = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
        scatter[l] += (x.row(i) - centers.row(static_cast<Eigen::Index>(l))).norm();
    }
    for (std::size_t c = 0; c < uk; ++c) scatter[c] /= sizes[c];
    double db = 0.0;
    for (std::size_t c = 0; c < uk; ++c) {
        double worst = 0.0;
        for (std::size_t o = 0; o < uk; ++o) {
            if (o == c) continue;
            const double sep = (centers.row(static_cast<Eigen::Index>(c)) - centers.row(static_cast<Eigen::Index>(o))).norm();
            if (sep > 0.0) worst = std::max(worst, (scatter[c] + scatter[o]) / sep);
        }
        db += worst;
    }
    r.davies_bouldin = db / k;
    return r;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InvalidArgument("label_length_mismatch", "labelings differ in length");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    const auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, m] : table) index += pairs(m);
    for (const auto& [key, m] : rows) sum_rows += pairs(m);
    for (const auto& [key, m] : cols) sum_cols += pairs(m);
    const double expected = sum_rows * sum_cols / pairs(n);
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return 1.0;
    return (index - expected) / (maximum - expected);
}

}  // namespace moleda::cluster
