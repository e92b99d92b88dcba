#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace moleda::cluster {

struct Clustering {
    std::vector<int> labels;
    int k = 0;
    /// k x d centroids (k-means only; empty otherwise).
    Eigen::MatrixXd centers;
    double inertia = 0.0;
    std::uint64_t seed = 0;
    /// Inertia after every Lloyd iteration (k-means only).
    std::vector<double> inertia_history;
};

struct ValidityReport {
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
    double davies_bouldin = 0.0;
};

enum class Linkage { Single, Average, Ward };

std::string_view linkage_name(Linkage l) noexcept;
Linkage linkage_from_name(std::string_view name);

inline constexpr int kMaxLloydIterations = 300;

/// k-means++ seeding followed by Lloyd iterations until the assignment is
/// stable (or 300 iterations). Empty clusters are reseeded at the point
/// farthest from its centre.
Clustering kmeans(const Eigen::MatrixXd& vectors, int k, std::uint64_t seed);

/// Bottom-up merging to k clusters; ties go to the lexicographically smallest
/// (i, j) pair, clusters being identified by their smallest member.
/// Ward merges minimise |A||B|/(|A|+|B|)·‖c_A − c_B‖².
Clustering agglomerative(const Eigen::MatrixXd& vectors, int k, Linkage linkage);

/// Silhouette, Calinski-Harabasz and Davies-Bouldin indices (Euclidean).
ValidityReport validity(const Eigen::MatrixXd& vectors, std::span<const int> labels);

/// Adjusted Rand index between two labelings of the same points.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Relabels to 0..k-1 in order of first appearance; returns k.
int compact_labels(std::vector<int>& labels);

}  // namespace moleda::cluster
