#include "moleda/embed/embedding.hpp"

#include <cmath>

#include "moleda/error.hpp"

namespace moleda::embed {

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::Pca: return "pca";
        case Method::Kpca: return "kpca";
        case Method::Ckpca: return "ckpca";
        case Method::Tsne: return "tsne";
        case Method::Lsp: return "lsp";
    }
    return "pca";
}

Method method_from_name(std::string_view name) {
    if (name == "pca") return Method::Pca;
    if (name == "kpca") return Method::Kpca;
    if (name == "ckpca") return Method::Ckpca;
    if (name == "tsne") return Method::Tsne;
    if (name == "lsp") return Method::Lsp;
    throw InvalidArgument("unknown_embed_method", "unknown embedding method '" + std::string(name) + "'");
}

Frame Frame::fit(const Coords& raw) {
    Frame f;
    if (raw.rows() == 0) return f;
    const Eigen::Vector2d lo = raw.colwise().minCoeff();
    const Eigen::Vector2d hi = raw.colwise().maxCoeff();
    f.center_x = 0.5 * (lo.x() + hi.x());
    f.center_y = 0.5 * (lo.y() + hi.y());
    const double side = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    f.scale = side > 0.0 ? 2.0 / side : 1.0;
    return f;
}

Coords Frame::to_unit(const Coords& raw) const {
    Coords out(raw.rows(), 2);
    out.col(0) = (raw.col(0).array() - center_x) * scale;
    out.col(1) = (raw.col(1).array() - center_y) * scale;
    return out;
}

Eigen::Vector2d Frame::to_raw(double x, double y) const { return {x / scale + center_x, y / scale + center_y}; }

void orient_columns(Eigen::Ref<Eigen::MatrixXd> m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double peak = m.col(c).cwiseAbs().maxCoeff();
        if (peak == 0.0) continue;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (std::abs(m(r, c)) >= peak * (1.0 - 1e-9)) {
                if (m(r, c) < 0.0) m.col(c) *= -1.0;
                break;
            }
        }
    }
}

double diameter(const Coords& coords) {
    if (coords.rows() == 0) return 0.0;
    return (coords.colwise().maxCoeff() - coords.colwise().minCoeff()).maxCoeff();
}

}  // namespace moleda::embed
