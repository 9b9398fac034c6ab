#pragma once

// Mode computation by direct minimization of the control functional
//
//   J(z) = 1/2 int_0^T E ||z' - A(t)(B(t) + z) - D(t)||^2 dt
//        = 1/2 int_0^T ( ||z' - A z - D||^2 + tr(A^T A) t ) dt
//
// over paths z(t) = a t / T + sum_k c_k phi_k(t), where phi_k = P_{k+1} - P_{k-1}
// (shifted Legendre, s = 2t/T - 1) vanish at both ends. J is a convex quadratic
// in c, so the minimizer solves the SPD system G c = r.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "fkode/errors.hpp"
#include "fkode/grid.hpp"
#include "fkode/quadrature.hpp"
#include "fkode/riccati.hpp"
#include "fkode/sampled_path.hpp"
#include "fkode/transform.hpp"

namespace fkode {

/// Boundary interpolant plus endpoint-vanishing Legendre differences.
///
/// Coefficients are stored basis-major: entry (k-1)*n + i multiplies phi_k e_i.
class BasisExpansion {
public:
    BasisExpansion(std::size_t degree, double horizon, Eigen::VectorXd terminal)
        : BasisExpansion(degree, horizon, terminal, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(degree) * terminal.size())) {}

    BasisExpansion(std::size_t degree, double horizon, Eigen::VectorXd terminal, Eigen::VectorXd coefficients)
        : degree_(degree), horizon_(horizon), terminal_(std::move(terminal)), coefficients_(std::move(coefficients)) {
        if (!(horizon > 0.0)) throw ConfigError("basis horizon must be positive");
        if (coefficients_.size() != static_cast<Eigen::Index>(degree_) * terminal_.size()) {
            throw ConfigError("basis coefficient vector has the wrong length");
        }
    }

    [[nodiscard]] std::size_t degree() const noexcept { return degree_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return terminal_.size(); }
    [[nodiscard]] std::size_t unknowns() const noexcept { return static_cast<std::size_t>(coefficients_.size()); }
    [[nodiscard]] const Eigen::VectorXd& terminal() const noexcept { return terminal_; }
    [[nodiscard]] const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }

    /// phi_k, phi_k', phi_k'' at t for k = 1..N (index k-1).
    struct BasisValues {
        std::vector<double> phi;
        std::vector<double> dphi;
        std::vector<double> ddphi;
    };

    [[nodiscard]] BasisValues basis(double t) const {
        BasisValues out;
        basis(t, out);
        return out;
    }

    void basis(double t, BasisValues& out) const {
        const double s = 2.0 * t / horizon_ - 1.0;
        std::vector<double> p;
        std::vector<double> dp;
        legendre_table(s, degree_ + 1, p, dp);
        out.phi.resize(degree_);
        out.dphi.resize(degree_);
        out.ddphi.resize(degree_);
        const double c1 = 2.0 / horizon_;
        const double c2 = c1 * c1;
        for (std::size_t k = 1; k <= degree_; ++k) {
            const auto w = static_cast<double>(2 * k + 1);
            out.phi[k - 1] = p[k + 1] - p[k - 1];
            out.dphi[k - 1] = c1 * w * p[k];
            out.ddphi[k - 1] = c2 * w * dp[k];
        }
    }

    [[nodiscard]] Eigen::VectorXd value(double t) const { return evaluate(t, 0); }
    [[nodiscard]] Eigen::VectorXd derivative(double t) const { return evaluate(t, 1); }
    [[nodiscard]] Eigen::VectorXd second_derivative(double t) const { return evaluate(t, 2); }

    [[nodiscard]] SampledPath sample(const Grid& grid) const {
        return SampledPath::from_function(grid, [this](double t) { return value(t); });
    }

private:
    [[nodiscard]] Eigen::VectorXd evaluate(double t, int order) const {
        const Eigen::Index n = dimension();
        Eigen::VectorXd out = order == 0 ? Eigen::VectorXd(terminal_ * (t / horizon_))
                              : order == 1 ? Eigen::VectorXd(terminal_ / horizon_)
                                           : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
        if (degree_ == 0) return out;
        BasisValues b;
        basis(t, b);
        const std::vector<double>& v = order == 0 ? b.phi : order == 1 ? b.dphi : b.ddphi;
        for (std::size_t k = 0; k < degree_; ++k) {
            out += v[k] * coefficients_.segment(static_cast<Eigen::Index>(k) * n, n);
        }
        return out;
    }

    std::size_t degree_;
    double horizon_;
    Eigen::VectorXd terminal_;
    Eigen::VectorXd coefficients_;
};

/// Brownian expectation of ||z' - A (B + z) - D||^2 at time t, in closed form
/// (E B = 0, E B_i B_j = delta_ij t).
inline double closed_form_lagrangian(const Eigen::VectorXd& z, const Eigen::VectorXd& z_dot, double t,
                                     const Eigen::MatrixXd& a, const Eigen::VectorXd& d) {
    return (z_dot - a * z - d).squaredNorm() + a.squaredNorm() * t;
}

inline double closed_form_lagrangian(const Eigen::VectorXd& z, const Eigen::VectorXd& z_dot, double t,
                                     const DriftPair& drift) {
    return closed_form_lagrangian(z, z_dot, t, drift.A_at(t), drift.D_at(t));
}

inline double closed_form_lagrangian(double z, double z_dot, double t, double a, double d) {
    const double r = z_dot - a * z - d;
    return r * r + a * a * t;
}

/// Normal equations of the quadratic functional in the basis coefficients:
/// J(c) = 1/2 c^T G c - r^T c + kappa.
struct Assembly {
    Eigen::MatrixXd gram;
    Eigen::VectorXd rhs;
    double kappa = 0.0;
};

inline Assembly assemble(const DriftPair& drift, const BasisExpansion& basis, const QuadratureRule& quad) {
    const std::size_t degree = basis.degree();
    if (quad.order() < degree + 2) {
        throw Error("quadrature order " + std::to_string(quad.order()) + " too low for basis degree " +
                    std::to_string(degree) + " (need >= degree + 2)");
    }
    const Eigen::Index n = basis.dimension();
    if (drift.dimension() != n) throw GridMismatch("drift and basis dimensions differ");
    const Eigen::Index unknowns = static_cast<Eigen::Index>(degree) * n;
    const double horizon = basis.horizon();
    const Eigen::VectorXd& a_end = basis.terminal();

    Assembly out;
    out.gram = Eigen::MatrixXd::Zero(unknowns, unknowns);
    out.rhs = Eigen::VectorXd::Zero(unknowns);
    Eigen::MatrixXd psi(n, unknowns);
    BasisExpansion::BasisValues b;
    for (std::size_t q = 0; q < quad.order(); ++q) {
        const double t = quad.nodes[q];
        const double w = quad.weights[q];
        const Eigen::MatrixXd a = drift.A_at(t);
        const Eigen::VectorXd d = drift.D_at(t);
        const Eigen::VectorXd rho = a_end / horizon - a * (a_end * (t / horizon)) - d;
        if (degree > 0) {
            basis.basis(t, b);
            for (std::size_t k = 0; k < degree; ++k) {
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Eigen::Index col = static_cast<Eigen::Index>(k) * n + i;
                    psi.col(col) = -b.phi[k] * a.col(i);
                    psi(i, col) += b.dphi[k];
                }
            }
            out.gram.noalias() += w * psi.transpose() * psi;
            out.rhs.noalias() -= w * psi.transpose() * rho;
        }
        out.kappa += 0.5 * w * (rho.squaredNorm() + a.squaredNorm() * t);
    }
    return out;
}

struct ModeSolution {
    BasisExpansion expansion;
    SampledPath samples;        ///< z* on the drift grid
    double functional = 0.0;    ///< J(z*) = 1/2 c^T G c - r^T c + kappa
    double el_residual = 0.0;   ///< int ||z'' - (A^T A + A') z - (D' + A^T D)||^2 w.r.t. the drift itself
    double min_pivot = 0.0;     ///< smallest Cholesky pivot of G
    double condition = 1.0;     ///< max/min Cholesky pivot ratio
    std::size_t quadrature_order = 0;
};

/// Default quadrature order for a basis of degree N.
inline std::size_t default_quadrature_order(std::size_t degree) { return degree + 8; }

/// Minimize the control functional for the given drift with z(0) = 0, z(T) = a.
inline ModeSolution minimize(const DriftPair& drift, const Eigen::VectorXd& terminal, std::size_t degree,
                             std::optional<std::size_t> quad_order = std::nullopt) {
    const double horizon = drift.grid().horizon();
    const std::size_t order = quad_order.value_or(default_quadrature_order(degree));
    const QuadratureRule quad = gauss_legendre(order, horizon);
    const BasisExpansion empty(degree, horizon, terminal);
    const Assembly sys = assemble(drift, empty, quad);

    Eigen::VectorXd c = Eigen::VectorXd::Zero(sys.rhs.size());
    double min_pivot = 0.0;
    double condition = 1.0;
    if (sys.rhs.size() > 0) {
        const Eigen::LLT<Eigen::MatrixXd> llt(sys.gram);
        if (llt.info() != Eigen::Success) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys.gram, Eigen::EigenvaluesOnly);
            const auto& ev = eig.eigenvalues();
            throw SingularSystem("Gram matrix is not positive definite (eigenvalues in [" + std::to_string(ev.minCoeff()) +
                                     ", " + std::to_string(ev.maxCoeff()) + "])",
                                 0);
        }
        const Eigen::VectorXd pivots = llt.matrixLLT().diagonal().array().square();
        min_pivot = pivots.minCoeff();
        condition = pivots.maxCoeff() / min_pivot;
        if (!(min_pivot > 0.0)) throw SingularSystem("Gram matrix has a non-positive pivot", 0);
        c = llt.solve(sys.rhs);
    }
    BasisExpansion expansion(degree, horizon, terminal, c);
    const double functional = 0.5 * c.dot(sys.gram * c) - sys.rhs.dot(c) + sys.kappa;

    double residual = 0.0;
    for (std::size_t q = 0; q < quad.order(); ++q) {
        const double t = quad.nodes[q];
        const Eigen::MatrixXd a = drift.A_at(t);
        const Eigen::VectorXd z = expansion.value(t);
        const Eigen::VectorXd defect = expansion.second_derivative(t) - (a.transpose() * a + drift.A_dot_at(t)) * z -
                                       (drift.D_dot_at(t) + a.transpose() * drift.D_at(t));
        residual += quad.weights[q] * defect.squaredNorm();
    }

    SampledPath samples = expansion.sample(drift.grid());
    return ModeSolution{std::move(expansion), std::move(samples), functional, residual, min_pivot, condition, order};
}

inline ModeSolution minimize(const DriftPair& drift, double terminal, std::size_t degree,
                             std::optional<std::size_t> quad_order = std::nullopt) {
    return minimize(drift, Eigen::VectorXd::Constant(1, terminal), degree, quad_order);
}

/// 1/2 int closed_form_lagrangian along the expansion, by the given quadrature.
inline double functional_by_quadrature(const BasisExpansion& z, const DriftPair& drift, const QuadratureRule& quad) {
    return 0.5 * quad.integrate([&](double t) { return closed_form_lagrangian(z.value(t), z.derivative(t), t, drift); });
}

/// int_0^T ||z'' + ghat z + hhat||^2 dt by 5-point Gauss on every grid cell.
inline double el_residual(const BasisExpansion& z, const MatrixFunction& ghat, const VectorFunction& hhat,
                          const Grid& grid) {
    const QuadratureRule quad = composite_gauss_legendre(5, grid.intervals(), grid.horizon());
    return quad.integrate([&](double t) {
        return (z.second_derivative(t) + ghat(t) * z.value(t) + hhat(t)).squaredNorm();
    });
}

inline double el_residual(const ModeSolution& mode, const MatrixFunction& ghat, const VectorFunction& hhat,
                          const Grid& grid) {
    return el_residual(mode.expansion, ghat, hhat, grid);
}

inline double el_residual(const ModeSolution& mode, const WeightedCoefficients& w) {
    return el_residual(mode.expansion, [&](double t) { return w.ghat(t); }, [&](double t) { return w.hhat(t); },
                       w.grid());
}

}  // namespace fkode
