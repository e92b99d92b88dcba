#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace moleda::embed {

using Coords = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class Method { Pca, Kpca, Ckpca, Tsne, Lsp };

std::string_view method_name(Method m) noexcept;
Method method_from_name(std::string_view name);

struct Embedding {
    Coords coords;
    Method method = Method::Pca;
    std::uint64_t version = 0;
    /// Kernel and hyperparameters that produced the coordinates.
    std::map<std::string, std::string> provenance;
};

/// Affine map from raw solver coordinates to the unit frame: bounding box
/// centred on the origin with its longer side equal to 2.
struct Frame {
    double center_x = 0.0;
    double center_y = 0.0;
    double scale = 1.0;

    static Frame fit(const Coords& raw);

    Coords to_unit(const Coords& raw) const;
    Eigen::Vector2d to_raw(double x, double y) const;
};

/// Flips each column so that its largest-magnitude entry is positive
/// (first index wins among equal magnitudes).
void orient_columns(Eigen::Ref<Eigen::MatrixXd> m);

/// Max over columns of (max - min); 0 for empty input.
double diameter(const Coords& coords);

}  // namespace moleda::embed
