#include "moleda/embed/spectral.hpp"

#include <cmath>
#include <string>

#include "moleda/error.hpp"

namespace moleda::embed {

Embedding pca(const Eigen::MatrixXd& vectors) {
    if (vectors.rows() < 3) throw InvalidArgument("too_few_points", "pca needs at least 3 points");
    if (!vectors.allFinite()) throw InvalidArgument("non_finite_input", "feature vectors contain NaN or infinity");

    const Eigen::MatrixXd centered = vectors.rowwise() - vectors.colwise().mean();
    const double scale = 1.0 + vectors.cwiseAbs().maxCoeff();
    if (centered.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
        throw InvalidArgument("degenerate_data", "all points are identical");
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::Index comps = std::min<Eigen::Index>(kDims, svd.matrixV().cols());
    Eigen::MatrixXd loadings = svd.matrixV().leftCols(comps);
    orient_columns(loadings);

    Embedding e;
    e.method = Method::Pca;
    e.coords = Coords::Zero(vectors.rows(), 2);
    e.coords.leftCols(comps) = centered * loadings;
    e.provenance = {{"method", "pca"}};
    return e;
}

Embedding kpca(const KernelMatrix& centered) {
    if (!centered.centered) throw InvalidArgument("not_centered", "kpca needs a centred kernel");
    const Eigen::Index n = centered.n();
    if (n < 3) throw InvalidArgument("too_few_points", "kpca needs at least 3 points");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.values);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver_failed", "kernel eigendecomposition failed");
    const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
    const double tol = 1e-12 * std::max(1.0, std::abs(values(n - 1)));
    if (!(values(n - 2) > tol)) {
        throw NumericalError("rank_deficient", "kernel has fewer than 2 positive eigenvalues");
    }

    Eigen::MatrixXd cols(n, kDims);
    for (int d = 0; d < kDims; ++d) cols.col(d) = std::sqrt(values(n - 1 - d)) * eig.eigenvectors().col(n - 1 - d);
    orient_columns(cols);

    Embedding e;
    e.method = Method::Kpca;
    e.coords = cols;
    e.provenance = {{"method", "kpca"}};
    return e;
}

}  // namespace moleda::embed
