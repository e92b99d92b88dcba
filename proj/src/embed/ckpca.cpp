#include "moleda/embed/ckpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <utility>

#include "moleda/error.hpp"

namespace moleda::embed {

namespace {

void reject(const std::string& message) { throw InvalidArgument("invalid_constraint", message); }

std::pair<std::size_t, std::size_t> unordered(const Link& l) { return std::minmax(l.i, l.j); }

}  // namespace

void ConstraintSet::validate(std::size_t n) const {
    const auto strength_ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!strength_ok(mu_cp) || !strength_ok(mu_ml) || !strength_ok(mu_cl)) reject("strengths must be finite and >= 0");
    if (!(lambda > 0.0 && lambda < 1.0)) reject("lambda must lie in (0, 1)");

    std::set<std::size_t> controlled;
    for (const auto& cp : control_points) {
        if (cp.index >= n) reject("control index " + std::to_string(cp.index) + " out of range");
        if (!std::isfinite(cp.x) || !std::isfinite(cp.y)) reject("control target must be finite");
        if (!controlled.insert(cp.index).second) reject("duplicate control for index " + std::to_string(cp.index));
    }
    std::set<std::pair<std::size_t, std::size_t>> must;
    for (const auto& l : must_links) {
        if (l.i >= n || l.j >= n) reject("must-link index out of range");
        if (l.i == l.j) reject("must-link joins a point to itself");
        if (!must.insert(unordered(l)).second) reject("duplicate must-link");
    }
    std::set<std::pair<std::size_t, std::size_t>> cannot;
    for (const auto& l : cannot_links) {
        if (l.i >= n || l.j >= n) reject("cannot-link index out of range");
        if (l.i == l.j) reject("cannot-link joins a point to itself");
        if (!cannot.insert(unordered(l)).second) reject("duplicate cannot-link");
        if (must.count(unordered(l))) reject("pair is both a must-link and a cannot-link");
    }
}

const ControlPoint* ConstraintSet::find_control(std::size_t index) const {
    for (const auto& cp : control_points) {
        if (cp.index == index) return &cp;
    }
    return nullptr;
}

namespace {

struct Deflated {
    std::vector<Eigen::Index> live;  // indices with non-zero q component, ascending
    double theta = 0.0;              // smallest eigenvalue of the restricted quadratic form
    Eigen::VectorXd direction;       // its unit eigenvector
};

/// Smallest eigenpair of diag(σ) restricted to the complement of q.
Deflated deflate(const Eigen::VectorXd& sigma, const Eigen::VectorXd& q) {
    const Eigen::Index r = sigma.size();
    Deflated d;
    double zero_min = std::numeric_limits<double>::infinity();
    Eigen::Index zero_arg = -1;
    for (Eigen::Index k = 0; k < r; ++k) {
        if (std::abs(q(k)) > 1e-14) {
            d.live.push_back(k);
        } else if (sigma(k) < zero_min) {
            zero_min = sigma(k);
            zero_arg = k;
        }
    }

    double root = std::numeric_limits<double>::infinity();
    if (d.live.size() >= 2) {
        const Eigen::Index a = d.live[0];
        const Eigen::Index b = d.live[1];
        if (sigma(a) == sigma(b)) {
            root = sigma(a);
        } else {
            // f(θ) = Σ q_k²/(σ_k − θ) increases from −∞ to +∞ on (σ_a, σ_b).
            double lo = sigma(a), hi = sigma(b);
            for (int it = 0; it < 200; ++it) {
                const double mid = lo + 0.5 * (hi - lo);
                if (mid <= lo || mid >= hi) break;
                double f = 0.0;
                for (Eigen::Index k : d.live) f += q(k) * q(k) / (sigma(k) - mid);
                (f < 0.0 ? lo : hi) = mid;
            }
            root = hi;
        }
    }

    d.direction = Eigen::VectorXd::Zero(r);
    if (zero_arg >= 0 && zero_min <= root) {
        d.theta = zero_min;
        d.direction(zero_arg) = 1.0;
        return d;
    }
    d.theta = root;
    const Eigen::Index a = d.live[0];
    const Eigen::Index b = d.live[1];
    if (sigma(a) == sigma(b)) {
        d.direction(a) = q(b);
        d.direction(b) = -q(a);
    } else {
        for (Eigen::Index k : d.live) {
            const double gap = sigma(k) - root;
            d.direction(k) = gap != 0.0 ? q(k) / gap : 0.0;
        }
        if (!d.direction.allFinite() || d.direction.norm() == 0.0) {
            d.direction.setZero();
            d.direction(a) = 1.0;
        }
    }
    d.direction -= d.direction.dot(q) * q;
    d.direction.normalize();
    return d;
}

/// ζ(γ) = (P(diag σ − γ)P)⁺ P g for the complement projector P of q (or identity).
/// Written so that the removable pole at the lowest live σ cancels analytically.
Eigen::VectorXd stationary_point(const Eigen::VectorXd& sigma, const Eigen::VectorXd& g, const Eigen::VectorXd* q,
                                 const std::vector<Eigen::Index>& live, double gamma) {
    const Eigen::Index r = sigma.size();
    Eigen::VectorXd z(r);
    if (!q) {
        for (Eigen::Index k = 0; k < r; ++k) z(k) = g(k) / (sigma(k) - gamma);
        return z;
    }
    std::vector<bool> is_live(static_cast<std::size_t>(r), false);
    for (Eigen::Index k : live) is_live[static_cast<std::size_t>(k)] = true;
    for (Eigen::Index k = 0; k < r; ++k) {
        if (!is_live[static_cast<std::size_t>(k)]) z(k) = g(k) / (sigma(k) - gamma);
    }
    const Eigen::Index a = live.front();
    const double qa = (*q)(a);
    const double delta = sigma(a) - gamma;
    double sum_qq = 0.0, sum_qg = 0.0;
    for (std::size_t t = 1; t < live.size(); ++t) {
        const Eigen::Index k = live[t];
        const double inv = 1.0 / (sigma(k) - gamma);
        sum_qq += (*q)(k) * (*q)(k) * inv;
        sum_qg += (*q)(k) * g(k) * inv;
    }
    const double s_qq = qa * qa + delta * sum_qq;
    const double s_qg = qa * g(a) + delta * sum_qg;
    z(a) = (g(a) * sum_qq - qa * sum_qg) / s_qq;
    for (std::size_t t = 1; t < live.size(); ++t) {
        const Eigen::Index k = live[t];
        z(k) = (g(k) * s_qq - (*q)(k) * s_qg) / ((sigma(k) - gamma) * s_qq);
    }
    return z;
}

}  // namespace

Eigen::VectorXd solve_sphere_quadratic(const Eigen::VectorXd& sigma, const Eigen::VectorXd& g,
                                       const Eigen::VectorXd* q,
                                       const std::function<double(const Eigen::VectorXd&)>& orientation) {
    const Eigen::Index r = sigma.size();
    Deflated defl;
    if (q) {
        defl = deflate(sigma, *q);
    } else {
        defl.theta = sigma(0);
        defl.direction = Eigen::VectorXd::Unit(r, 0);
    }
    const auto oriented = [&](Eigen::VectorXd v) {
        if (orientation(v) < 0.0) v = -v;
        return v;
    };

    Eigen::VectorXd rhs = g;
    if (q) rhs -= q->dot(g) * (*q);
    const double gnorm = rhs.norm();
    if (gnorm == 0.0) return oriented(defl.direction);

    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    const double top = defl.theta - 1e-13 * scale;
    const auto at = [&](double gamma) { return stationary_point(sigma, rhs, q, defl.live, gamma); };

    Eigen::VectorXd z_top = at(top);
    if (z_top.squaredNorm() < 1.0) {
        // Hard case: the linear term has no weight on the bottom eigen-direction.
        const double along = defl.direction.dot(z_top);
        Eigen::VectorXd rest = z_top - along * defl.direction;
        const double fill = std::sqrt(std::max(0.0, 1.0 - rest.squaredNorm()));
        double sign = along > 0.0 ? 1.0 : along < 0.0 ? -1.0 : (orientation(defl.direction) < 0.0 ? -1.0 : 1.0);
        rest += sign * fill * defl.direction;
        return rest / rest.norm();
    }

    double lo = defl.theta - gnorm - 1e-13 * scale;
    double hi = top;
    for (int it = 0; it < 300; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        (at(mid).squaredNorm() < 1.0 ? lo : hi) = mid;
    }
    Eigen::VectorXd z = at(hi);
    const double nz = z.norm();
    if (!std::isfinite(nz) || nz == 0.0) {
        throw NumericalError("singular_system", "secular equation did not converge");
    }
    return z / nz;
}

CkpcaState::CkpcaState(KernelMatrix centered, ConstraintSet constraints) : kernel_(std::move(centered)) {
    if (!kernel_.centered) throw InvalidArgument("not_centered", "ckpca needs a centred kernel");
    const Eigen::Index n = kernel_.n();
    if (n < 3) throw InvalidArgument("too_few_points", "ckpca needs at least 3 points");
    constraints.validate(static_cast<std::size_t>(n));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kernel_.values);
    if (eig.info() != Eigen::Success) throw NumericalError("eigensolver_failed", "kernel eigendecomposition failed");
    eigenvalues_ = eig.eigenvalues().reverse();
    eigenvectors_ = eig.eigenvectors().rowwise().reverse();

    const double tol = 1e-12 * std::max(1.0, std::abs(eigenvalues_(0)));
    if (!(eigenvalues_(1) > tol)) {
        throw NumericalError("rank_deficient", "kernel has fewer than 2 positive eigenvalues");
    }
    Eigen::MatrixXd top(n, 2);
    for (int d = 0; d < 2; ++d) top.col(d) = std::sqrt(eigenvalues_(d)) * eigenvectors_.col(d);
    orient_columns(top);
    frame_ = Frame::fit(top);
    base_ = frame_.to_unit(top);

    truncate(constraints.lambda);
    constraints_ = std::move(constraints);
}

void CkpcaState::truncate(double lambda) {
    if (lambda == truncated_lambda_) return;
    const double lead = eigenvalues_(0);
    const double floor = std::max(lambda * lead, 1e-12 * std::max(1.0, lead));
    Eigen::Index r = 0;
    while (r < eigenvalues_.size() && eigenvalues_(r) > floor) ++r;
    r = std::max<Eigen::Index>(r, 2);
    root_ = eigenvalues_.head(r).cwiseSqrt();
    basis_ = eigenvectors_.leftCols(r) * root_.asDiagonal();
    truncated_lambda_ = lambda;
    factor_.reset();
}

void CkpcaState::set_constraints(ConstraintSet constraints) {
    constraints.validate(size());
    truncate(constraints.lambda);
    constraints_ = std::move(constraints);
    factor_.reset();
}

CkpcaState::Factorization CkpcaState::factorize(const ConstraintSet& c) const {
    const Eigen::Index r = basis_.cols();
    const double n = static_cast<double>(size());
    Factorization f;
    if (c.empty()) {
        f.sigma = -eigenvalues_.head(r) / n;
        f.vectors = Eigen::MatrixXd::Identity(r, r);
        f.mapped = basis_;
        return f;
    }

    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(r, r);
    hessian.diagonal() = -eigenvalues_.head(r) / n;
    auto lower = hessian.selfadjointView<Eigen::Lower>();
    for (const auto& cp : c.control_points) {
        lower.rankUpdate(Eigen::VectorXd(basis_.row(static_cast<Eigen::Index>(cp.index)).transpose()), c.mu_cp);
    }
    const auto link_update = [&](const Link& l, double weight) {
        const Eigen::VectorXd diff = (basis_.row(static_cast<Eigen::Index>(l.i)) -
                                      basis_.row(static_cast<Eigen::Index>(l.j))).transpose();
        lower.rankUpdate(diff, weight);
    };
    for (const auto& l : c.must_links) link_update(l, c.mu_ml);
    for (const auto& l : c.cannot_links) link_update(l, -c.mu_cl);

    Eigen::MatrixXd full = hessian.selfadjointView<Eigen::Lower>();
    if (!full.allFinite()) throw NumericalError("singular_system", "constraint system is not finite");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(full);
    if (eig.info() != Eigen::Success) throw NumericalError("singular_system", "constraint system factorisation failed");
    f.sigma = eig.eigenvalues();
    f.vectors = eig.eigenvectors();
    f.mapped = basis_ * f.vectors;
    return f;
}

Embedding CkpcaState::solve_with(const Factorization& f, const ConstraintSet& c, Eigen::MatrixXd& alpha,
                                 Coords& raw) const {
    const Eigen::Index n = kernel_.n();
    const Eigen::Index r = basis_.cols();

    Eigen::VectorXd rhs[2] = {Eigen::VectorXd::Zero(r), Eigen::VectorXd::Zero(r)};
    for (const auto& cp : c.control_points) {
        const Eigen::Vector2d target = frame_.to_raw(cp.x, cp.y);
        const auto row = f.mapped.row(static_cast<Eigen::Index>(cp.index));
        for (int d = 0; d < 2; ++d) rhs[d] += (c.mu_cp * target(d)) * row.transpose();
    }

    const auto orientation = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd y = f.mapped * v;
        const double peak = y.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (std::abs(y(i)) >= peak * (1.0 - 1e-9)) return y(i);
        }
        return 0.0;
    };

    const Eigen::VectorXd first = solve_sphere_quadratic(f.sigma, rhs[0], nullptr, orientation);
    const Eigen::VectorXd second = solve_sphere_quadratic(f.sigma, rhs[1], &first, orientation);

    raw.resize(n, 2);
    raw.col(0) = f.mapped * first;
    raw.col(1) = f.mapped * second;
    const Eigen::MatrixXd to_alpha = eigenvectors_.leftCols(r) * root_.cwiseInverse().asDiagonal() * f.vectors;
    alpha.resize(n, 2);
    alpha.col(0) = to_alpha * first;
    alpha.col(1) = to_alpha * second;
    if (!raw.allFinite()) throw NumericalError("singular_system", "constrained solve produced non-finite coordinates");

    Embedding e;
    e.method = Method::Ckpca;
    e.coords = frame_.to_unit(raw);
    e.provenance = {{"method", "ckpca"},
                    {"rank", std::to_string(r)},
                    {"mu_cp", std::to_string(c.mu_cp)},
                    {"mu_ml", std::to_string(c.mu_ml)},
                    {"mu_cl", std::to_string(c.mu_cl)},
                    {"lambda", std::to_string(c.lambda)}};
    return e;
}

Embedding CkpcaState::solve() {
    Factorization f = factorize(constraints_);
    Eigen::MatrixXd alpha;
    Coords raw;
    Embedding e = solve_with(f, constraints_, alpha, raw);
    factor_ = std::move(f);
    alpha_ = std::move(alpha);
    raw_ = std::move(raw);
    e.version = ++version_;
    current_ = e;
    return e;
}

Embedding CkpcaState::move_control(std::size_t index, double x, double y) {
    if (!constraints_.find_control(index)) {
        throw InvalidArgument("unknown_control", "point " + std::to_string(index) + " is not a control point");
    }
    if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidArgument("invalid_constraint", "control target must be finite");
    ConstraintSet moved = constraints_;
    for (auto& cp : moved.control_points) {
        if (cp.index == index) {
            cp.x = x;
            cp.y = y;
        }
    }
    if (!factor_) {
        constraints_ = std::move(moved);
        return solve();
    }
    Eigen::MatrixXd alpha;
    Coords raw;
    Embedding e = solve_with(*factor_, moved, alpha, raw);
    constraints_ = std::move(moved);
    alpha_ = std::move(alpha);
    raw_ = std::move(raw);
    e.version = ++version_;
    current_ = e;
    return e;
}

Embedding ckpca_solve(CkpcaState& state) { return state.solve(); }

Embedding ckpca_move_control(CkpcaState& state, std::size_t index, double x, double y) {
    return state.move_control(index, x, y);
}

}  // namespace moleda::embed
