#pragma once

// Exponential-weight reduction of y'' + f y' + g y + h = 0 to the first-order-free
// form  yhat'' + ghat yhat + hhat = 0  with  y = e^{-V} yhat,  V(t) = 1/2 int_0^t f.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "fkode/coefficient.hpp"
#include "fkode/errors.hpp"
#include "fkode/grid.hpp"
#include "fkode/matrix_exp.hpp"
#include "fkode/problem.hpp"
#include "fkode/sampled_path.hpp"

namespace fkode {

using MatrixFunction = std::function<Eigen::MatrixXd(double)>;
using VectorFunction = std::function<Eigen::VectorXd(double)>;

/// V(t_i) = 1/2 int_0^{t_i} f, accumulated cell by cell with Simpson's rule
/// (midpoint evaluations of f), so it is exact for cubic f.
inline std::vector<Eigen::MatrixXd> weight_V(const MatrixFunction& f, const Grid& grid) {
    std::vector<Eigen::MatrixXd> v(grid.size());
    Eigen::MatrixXd left = f(0.0);
    v[0] = Eigen::MatrixXd::Zero(left.rows(), left.cols());
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double t0 = grid.node(i);
        const double t1 = grid.node(i + 1);
        Eigen::MatrixXd right = f(t1);
        v[i + 1] = v[i] + 0.5 * (t1 - t0) / 6.0 * (left + 4.0 * f(0.5 * (t0 + t1)) + right);
        left = std::move(right);
    }
    return v;
}

/// Scalar overload.
inline std::vector<double> weight_V(const Coefficient& f, const Grid& grid) {
    const auto m = weight_V([&](double t) { return Eigen::MatrixXd::Constant(1, 1, f(t)); }, grid);
    std::vector<double> out(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = m[i](0, 0);
    return out;
}

/// max over grid nodes of the Frobenius norms of [e^{-V}, f] and [e^{-V}, g].
inline double commutator_defect(const Problem& p, const Grid& grid) {
    if (p.is_scalar()) return 0.0;
    const auto v = weight_V([&](double t) { return p.f(t); }, grid);
    double defect = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd e = matrix_exp(-v[i]);
        const Eigen::MatrixXd f = p.f(t);
        const Eigen::MatrixXd g = p.g(t);
        defect = std::max({defect, (e * f - f * e).norm(), (e * g - g * e).norm()});
    }
    return defect;
}

/// True when e^{-V(t)} commutes with f(t) and g(t) at every node to within tol.
/// Vacuously true for scalar problems.
inline bool commutativity_check(const Problem& p, const Grid& grid, double tol = 1e-10) {
    return commutator_defect(p, grid) <= tol;
}

/// Coefficients of the weighted problem, evaluable at any t in [0, T].
class WeightedCoefficients {
public:
    WeightedCoefficients(Problem problem, Grid grid, double commutator_tol = 1e-10)
        : problem_(std::move(problem)), grid_(grid), identity_(problem_.f_is_zero()) {
        if (grid_.horizon() != problem_.horizon()) throw GridMismatch("grid horizon differs from problem horizon");
        const auto n = static_cast<Eigen::Index>(problem_.dimension());
        if (identity_) {
            v_.assign(grid_.size(), Eigen::MatrixXd::Zero(n, n));
        } else {
            v_ = weight_V([this](double t) { return problem_.f(t); }, grid_);
        }
        commutator_defect_ = identity_ ? 0.0 : commutator_defect(problem_, grid_);
        commutes_ = commutator_defect_ <= commutator_tol;
        if (!commutes_) {
            throw CommutativityError("e^{-V(t)} does not commute with f(t) and g(t) (defect " +
                                         std::to_string(commutator_defect_) + ")",
                                     commutator_defect_);
        }
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const double t = grid_.node(i);
            const Eigen::MatrixXd raw = ghat_raw(t);
            const Eigen::MatrixXd reduced = ghat(t);
            const double scale = 1.0 + raw.cwiseAbs().maxCoeff();
            if ((raw - reduced).cwiseAbs().maxCoeff() > 1e-12 * scale) {
                throw Error("weighted coefficient identity violated at t=" + std::to_string(t));
            }
        }
    }

    [[nodiscard]] const Problem& problem() const noexcept { return problem_; }
    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return problem_.dimension(); }
    [[nodiscard]] double horizon() const noexcept { return problem_.horizon(); }
    [[nodiscard]] bool commutes() const noexcept { return commutes_; }
    [[nodiscard]] double commutator_defect_value() const noexcept { return commutator_defect_; }

    /// f == 0: the transform is the identity.
    [[nodiscard]] bool is_identity() const noexcept { return identity_; }

    /// ghat depends on t only through f, f', g; constant when those are.
    [[nodiscard]] bool ghat_is_constant() const noexcept { return problem_.f_is_constant() && problem_.g_is_constant(); }

    [[nodiscard]] const std::vector<Eigen::MatrixXd>& V_samples() const noexcept { return v_; }

    /// V(t): node value plus Simpson over the partial cell.
    [[nodiscard]] Eigen::MatrixXd V(double t) const {
        if (identity_) {
            const auto n = static_cast<Eigen::Index>(dimension());
            return Eigen::MatrixXd::Zero(n, n);
        }
        const std::size_t i = grid_.cell(t);
        const double t0 = grid_.node(i);
        const double tau = t - t0;
        if (tau == 0.0) return v_[i];
        return v_[i] + 0.5 * tau / 6.0 * (problem_.f(t0) + 4.0 * problem_.f(t0 + 0.5 * tau) + problem_.f(t));
    }

    /// -V'' + V'^2 - f V' + g with V' = f/2, V'' = f'/2.
    [[nodiscard]] Eigen::MatrixXd ghat_raw(double t) const {
        const Eigen::MatrixXd f = problem_.f(t);
        const Eigen::MatrixXd vdot = 0.5 * f;
        const Eigen::MatrixXd vddot = 0.5 * problem_.f_prime(t);
        return -vddot + vdot * vdot - f * vdot + problem_.g(t);
    }

    /// g - f'/2 - f^2/4.
    [[nodiscard]] Eigen::MatrixXd ghat(double t) const {
        if (identity_) return problem_.g(t);
        const Eigen::MatrixXd f = problem_.f(t);
        return problem_.g(t) - 0.5 * problem_.f_prime(t) - 0.25 * f * f;
    }

    /// e^{V(t)} h(t).
    [[nodiscard]] Eigen::VectorXd hhat(double t) const {
        if (identity_) return problem_.h(t);
        return matrix_exp(V(t)) * problem_.h(t);
    }

    /// Terminal value of the weighted problem, e^{V(T)} a, so that e^{-V(T)} yhat(T) = a.
    [[nodiscard]] Eigen::VectorXd terminal_hat() const {
        if (identity_) return problem_.terminal();
        return matrix_exp(v_.back()) * problem_.terminal();
    }

private:
    Problem problem_;
    Grid grid_;
    bool identity_;
    std::vector<Eigen::MatrixXd> v_;
    double commutator_defect_ = 0.0;
    bool commutes_ = true;
};

/// Throws CommutativityError for systems violating the commuting hypothesis.
inline WeightedCoefficients transform_coeffs(const Problem& p, const Grid& grid, double commutator_tol = 1e-10) {
    return WeightedCoefficients(p, grid, commutator_tol);
}

/// y(t_i) = e^{-V(t_i)} yhat(t_i).
inline SampledPath unweight(const SampledPath& yhat, const std::vector<Eigen::MatrixXd>& v) {
    if (v.size() != yhat.size()) throw GridMismatch("unweight: weight and path sampled on different grids");
    std::vector<Eigen::VectorXd> out(yhat.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (v[i].rows() != yhat[i].size()) throw GridMismatch("unweight: dimension mismatch");
        out[i] = v[i].size() == 1 ? Eigen::VectorXd(std::exp(-v[i](0, 0)) * yhat[i]) : Eigen::VectorXd(matrix_exp(-v[i]) * yhat[i]);
    }
    return SampledPath(yhat.grid(), std::move(out));
}

inline SampledPath unweight(const SampledPath& yhat, const WeightedCoefficients& w) {
    if (!(yhat.grid() == w.grid())) throw GridMismatch("unweight: path and weight on different grids");
    return unweight(yhat, w.V_samples());
}

}  // namespace fkode
