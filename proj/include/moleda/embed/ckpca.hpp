#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "moleda/embed/embedding.hpp"
#include "moleda/embed/kernel.hpp"

namespace moleda::embed {

struct ControlPoint {
    std::size_t index = 0;
    /// Target position in unit-frame coordinates.
    double x = 0.0;
    double y = 0.0;

    bool operator==(const ControlPoint&) const = default;
};

struct Link {
    std::size_t i = 0;
    std::size_t j = 0;

    bool operator==(const Link&) const = default;
};

/// The user's domain knowledge: pinned positions plus pairwise links.
struct ConstraintSet {
    std::vector<ControlPoint> control_points;
    std::vector<Link> must_links;
    std::vector<Link> cannot_links;
    double mu_cp = 100.0;
    double mu_ml = 1.0;
    double mu_cl = 1.0;
    double lambda = 1e-3;

    /// Throws InvalidArgument for out-of-range indices, self links, duplicate
    /// controls, a pair that is both must and cannot, or bad strengths.
    void validate(std::size_t n) const;

    bool empty() const noexcept { return control_points.empty() && must_links.empty() && cannot_links.empty(); }
    const ControlPoint* find_control(std::size_t index) const;

    bool operator==(const ConstraintSet&) const = default;
};

/// Minimises ζᵀdiag(σ)ζ − 2gᵀζ on the unit sphere, optionally restricted to
/// the complement of the unit vector `q`. `sigma` must be ascending.
/// `orientation(v)` is consulted only when the solution contains a free
/// eigen-direction v; its sign is made non-negative.
Eigen::VectorXd solve_sphere_quadratic(const Eigen::VectorXd& sigma, const Eigen::VectorXd& g,
                                       const Eigen::VectorXd* q,
                                       const std::function<double(const Eigen::VectorXd&)>& orientation);

/// Constrained kernel PCA.
///
/// Per output dimension the coefficient vector α maximises the kernel variance
/// αᵀK̄²α/n minus the control, must-link and cannot-link penalties, over
/// functions of fixed RKHS norm (αᵀK̄α equal to that of the kPCA solution).
/// The second dimension is kept K̄-orthogonal to the first. Working in the
/// whitened kernel eigenbasis the problem is a sphere-constrained quadratic
/// whose Hessian depends only on the constraint topology and strengths, so a
/// drag only changes the linear term: moves reuse the cached eigensystem and
/// cost O(n·r).
///
/// Kernel eigen-directions with eigenvalue <= lambda·λ_max are dropped
/// (truncated-spectrum regularisation).
///
/// Targets are in the unit frame fitted once on the unconstrained solution.
class CkpcaState {
public:
    explicit CkpcaState(KernelMatrix centered, ConstraintSet constraints = {});

    std::size_t size() const noexcept { return static_cast<std::size_t>(kernel_.n()); }
    std::size_t rank() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
    const ConstraintSet& constraints() const noexcept { return constraints_; }
    const KernelMatrix& kernel() const noexcept { return kernel_; }
    const Frame& frame() const noexcept { return frame_; }
    /// Unconstrained embedding in the unit frame.
    const Coords& base_coords() const noexcept { return base_; }

    /// Replaces the constraint set; the next solve refactors. Throws without
    /// modifying the state if the set is invalid.
    void set_constraints(ConstraintSet constraints);

    /// Rebuilds and factorises the system, then solves.
    Embedding solve();

    /// Retargets an existing control point reusing the cached factorisation.
    Embedding move_control(std::size_t index, double x, double y);

    /// Last emitted embedding (empty before the first solve).
    const std::optional<Embedding>& current() const noexcept { return current_; }

    /// n x 2 coefficients of the last solve; K̄·α equals the raw coordinates.
    const Eigen::MatrixXd& alpha() const noexcept { return alpha_; }

    /// Raw (pre-frame) coordinates of the last solve.
    const Coords& raw_coords() const noexcept { return raw_; }

private:
    struct Factorization {
        Eigen::VectorXd sigma;  // ascending eigenvalues of the Hessian
        Eigen::MatrixXd vectors;
        Eigen::MatrixXd mapped;  // n x r, maps eigen-coordinates to raw coordinates
    };

    void truncate(double lambda);
    Factorization factorize(const ConstraintSet& c) const;
    Embedding solve_with(const Factorization& f, const ConstraintSet& c, Eigen::MatrixXd& alpha, Coords& raw) const;

    KernelMatrix kernel_;
    Eigen::VectorXd eigenvalues_;   // descending, full spectrum
    Eigen::MatrixXd eigenvectors_;  // matching columns
    Eigen::VectorXd root_;          // sqrt of retained eigenvalues
    Eigen::MatrixXd basis_;         // n x r, columns u_k·sqrt(λ_k)
    double truncated_lambda_ = -1.0;

    ConstraintSet constraints_;
    std::optional<Factorization> factor_;
    Frame frame_;
    Coords base_;
    std::optional<Embedding> current_;
    Eigen::MatrixXd alpha_;
    Coords raw_;
    std::uint64_t version_ = 0;
};

Embedding ckpca_solve(CkpcaState& state);
Embedding ckpca_move_control(CkpcaState& state, std::size_t index, double x, double y);

}  // namespace moleda::embed
