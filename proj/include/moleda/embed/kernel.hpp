#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>
#include <vector>

namespace moleda::embed {

enum class KernelKind { Linear, Rbf, Tanimoto };

std::string_view kernel_name(KernelKind k) noexcept;
KernelKind kernel_from_name(std::string_view name);

struct KernelSpec {
    KernelKind kind = KernelKind::Rbf;
    /// rbf only; defaults to 1 / feature dimension.
    std::optional<double> gamma;
};

struct KernelMatrix {
    Eigen::MatrixXd values;
    bool centered = false;

    Eigen::Index n() const noexcept { return values.rows(); }
};

/// Stacks equally long vectors into an n x d matrix; throws "mixed_lengths" otherwise.
Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& vectors);

/// Gram matrix of the rows of `x`. Tanimoto requires every entry to be 0 or 1.
KernelMatrix build_kernel(const Eigen::MatrixXd& x, const KernelSpec& spec);

/// H K H with H = I - 11ᵀ/n.
KernelMatrix center(const KernelMatrix& k);

}  // namespace moleda::embed
