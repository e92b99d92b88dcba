#pragma once

#include <Eigen/Dense>

#include "moleda/embed/embedding.hpp"
#include "moleda/embed/kernel.hpp"

namespace moleda::embed {

inline constexpr int kDims = 2;

/// Projection of mean-centred rows onto the top two principal directions.
/// Each principal axis is oriented so that its largest-magnitude loading is positive.
Embedding pca(const Eigen::MatrixXd& vectors);

/// Kernel PCA on a centred kernel: column d is sqrt(λ_d)·v_d.
Embedding kpca(const KernelMatrix& centered);

}  // namespace moleda::embed
