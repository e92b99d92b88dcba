#pragma once

#include <Eigen/Dense>

namespace moleda::quality {

struct QualityReport {
    double trustworthiness = 0.0;
    double knn_preservation = 0.0;
    double shepard_spearman = 0.0;
    double normalized_stress = 0.0;
    int k_used = 0;
};

/// Scores how well `ld` (n x 2) preserves the neighbourhoods and distances of
/// `hd` (n x d). Ranks are 1-based with ties broken by point index; requires
/// n >= 2k + 2.
QualityReport embedding_quality(const Eigen::MatrixXd& hd, const Eigen::MatrixXd& ld, int k = 10);

/// Largest k accepted for n points (0 if none).
int max_quality_k(Eigen::Index n);

}  // namespace moleda::quality
