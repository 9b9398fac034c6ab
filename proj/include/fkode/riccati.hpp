#pragma once

// Drift pair construction: A solves  A^T A + A' = -ghat  (A^2 + A' = -ghat when
// n = 1) and D solves  D' + A^T D = -hhat.  Three routes for A: closed form for
// constant ghat, the linearizing substitution A = z'/z with z'' + ghat z = 0,
// and direct RK4 on the Riccati equation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fkode/errors.hpp"
#include "fkode/grid.hpp"
#include "fkode/transform.hpp"

namespace fkode {

enum class DriftMethod { Constant, LogDeriv, Direct };
enum class DriftStrategy { Auto, Constant, LogDeriv, Direct };

inline std::string to_string(DriftMethod m) {
    switch (m) {
        case DriftMethod::Constant: return "constant";
        case DriftMethod::LogDeriv: return "logderiv";
        case DriftMethod::Direct: return "direct";
    }
    return "?";
}

inline std::string to_string(DriftStrategy s) {
    switch (s) {
        case DriftStrategy::Auto: return "auto";
        case DriftStrategy::Constant: return "constant";
        case DriftStrategy::LogDeriv: return "logderiv";
        case DriftStrategy::Direct: return "direct";
    }
    return "?";
}

inline std::optional<DriftStrategy> parse_strategy(std::string_view s) {
    if (s == "auto") return DriftStrategy::Auto;
    if (s == "constant") return DriftStrategy::Constant;
    if (s == "logderiv") return DriftStrategy::LogDeriv;
    if (s == "direct") return DriftStrategy::Direct;
    return std::nullopt;
}

struct RiccatiOptions {
    std::size_t substeps = 16;  ///< RK4 steps per grid interval
    double blowup_norm = 1e6;   ///< direct method: escape when |A| exceeds this
    double z_floor = 1e-10;     ///< logderiv: escape when |z| drops below this
};

namespace detail {

template <typename M>
M hermite_value(const M& y0, const M& d0, const M& y1, const M& d1, double h, double s) {
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

template <typename M>
M hermite_slope(const M& y0, const M& d0, const M& y1, const M& d1, double h, double s) {
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) / h) * y0 + (3 * s2 - 4 * s + 1) * d0 + ((-6 * s2 + 6 * s) / h) * y1 + (3 * s2 - 2 * s) * d1;
}

/// Fourth-order finite-difference derivative of uniform samples at node i
/// (centered in the interior, one-sided 5-point next to the ends).
template <typename M>
M sample_derivative(const std::vector<M>& y, std::size_t i, double h) {
    const std::size_t m = y.size() - 1;
    if (m < 4) {
        if (i == 0) return (y[1] - y[0]) / h;
        if (i == m) return (y[m] - y[m - 1]) / h;
        return (y[i + 1] - y[i - 1]) / (2 * h);
    }
    if (i >= 2 && i + 2 <= m) return (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12 * h);
    if (i <= 1) {
        const std::size_t b = i == 0 ? 0 : i - 1;  // stencil y[b..b+4]
        if (i == 0) return (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12 * h);
        return (-3.0 * y[b] - 10.0 * y[b + 1] + 18.0 * y[b + 2] - 6.0 * y[b + 3] + y[b + 4]) / (12 * h);
    }
    if (i == m) return (25.0 * y[m] - 48.0 * y[m - 1] + 36.0 * y[m - 2] - 16.0 * y[m - 3] + 3.0 * y[m - 4]) / (12 * h);
    return (3.0 * y[m] + 10.0 * y[m - 1] - 18.0 * y[m - 2] + 6.0 * y[m - 3] - y[m - 4]) / (12 * h);
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Sampled A(t) with node derivatives taken from the Riccati right-hand side.
class RiccatiSolution {
public:
    RiccatiSolution(Grid grid, std::vector<Eigen::MatrixXd> a, std::vector<Eigen::MatrixXd> a_dot, DriftMethod method)
        : grid_(grid), a_(std::move(a)), a_dot_(std::move(a_dot)), method_(method) {
        if (a_.size() != grid_.size() || a_dot_.size() != grid_.size()) throw GridMismatch("Riccati samples do not match grid");
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] DriftMethod method() const noexcept { return method_; }
    [[nodiscard]] const std::vector<Eigen::MatrixXd>& samples() const noexcept { return a_; }
    [[nodiscard]] const std::vector<Eigen::MatrixXd>& slopes() const noexcept { return a_dot_; }

    [[nodiscard]] Eigen::MatrixXd at(double t) const {
        const std::size_t i = grid_.cell(t);
        const double h = grid_.step();
        return detail::hermite_value(a_[i], a_dot_[i], a_[i + 1], a_dot_[i + 1], h, (t - grid_.node(i)) / h);
    }

    [[nodiscard]] Eigen::MatrixXd slope_at(double t) const {
        const std::size_t i = grid_.cell(t);
        const double h = grid_.step();
        return detail::hermite_slope(a_[i], a_dot_[i], a_[i + 1], a_dot_[i + 1], h, (t - grid_.node(i)) / h);
    }

private:
    Grid grid_;
    std::vector<Eigen::MatrixXd> a_;
    std::vector<Eigen::MatrixXd> a_dot_;
    DriftMethod method_;
};

/// The affine drift Gamma(t, x) = A(t) x + D(t), sampled on a grid and
/// interpolated by piecewise-cubic Hermite polynomials between nodes.
class DriftPair {
public:
    DriftPair(RiccatiSolution a, std::vector<Eigen::VectorXd> d, std::vector<Eigen::VectorXd> d_dot)
        : a_(std::move(a)), d_(std::move(d)), d_dot_(std::move(d_dot)) {
        if (d_.size() != a_.grid().size() || d_dot_.size() != a_.grid().size()) throw GridMismatch("D samples do not match grid");
    }

    /// Constant drift A, D on the grid (handy for tests and experiments).
    static DriftPair constant(const Grid& grid, const Eigen::MatrixXd& a, const Eigen::VectorXd& d) {
        RiccatiSolution sol(grid, std::vector<Eigen::MatrixXd>(grid.size(), a),
                            std::vector<Eigen::MatrixXd>(grid.size(), Eigen::MatrixXd::Zero(a.rows(), a.cols())),
                            DriftMethod::Constant);
        return DriftPair(std::move(sol), std::vector<Eigen::VectorXd>(grid.size(), d),
                         std::vector<Eigen::VectorXd>(grid.size(), Eigen::VectorXd::Zero(d.size())));
    }

    static DriftPair constant(const Grid& grid, double a, double d) {
        return constant(grid, Eigen::MatrixXd::Constant(1, 1, a), Eigen::VectorXd::Constant(1, d));
    }

    [[nodiscard]] const Grid& grid() const noexcept { return a_.grid(); }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return a_.samples().front().rows(); }
    [[nodiscard]] DriftMethod method() const noexcept { return a_.method(); }
    [[nodiscard]] const RiccatiSolution& riccati() const noexcept { return a_; }

    [[nodiscard]] const Eigen::MatrixXd& A(std::size_t i) const { return a_.samples()[i]; }
    [[nodiscard]] const Eigen::VectorXd& D(std::size_t i) const { return d_[i]; }
    [[nodiscard]] const std::vector<Eigen::MatrixXd>& A_samples() const noexcept { return a_.samples(); }
    [[nodiscard]] const std::vector<Eigen::VectorXd>& D_samples() const noexcept { return d_; }

    [[nodiscard]] Eigen::MatrixXd A_at(double t) const { return a_.at(t); }
    [[nodiscard]] Eigen::MatrixXd A_dot_at(double t) const { return a_.slope_at(t); }

    [[nodiscard]] Eigen::VectorXd D_at(double t) const {
        const std::size_t i = grid().cell(t);
        const double h = grid().step();
        return detail::hermite_value(d_[i], d_dot_[i], d_[i + 1], d_dot_[i + 1], h, (t - grid().node(i)) / h);
    }

    [[nodiscard]] Eigen::VectorXd D_dot_at(double t) const {
        const std::size_t i = grid().cell(t);
        const double h = grid().step();
        return detail::hermite_slope(d_[i], d_dot_[i], d_[i + 1], d_dot_[i + 1], h, (t - grid().node(i)) / h);
    }

private:
    RiccatiSolution a_;
    std::vector<Eigen::VectorXd> d_;
    std::vector<Eigen::VectorXd> d_dot_;
};

/// Cor.-style closed form for constant ghat <= 0: A = sqrt(-ghat) (non-negative
/// root). Returns nullopt when ghat > 0.
inline std::optional<double> solve_riccati_constant(double ghat) {
    if (!(ghat <= 0.0)) return std::nullopt;
    return std::sqrt(-ghat);
}

/// Matrix version: symmetric negative semidefinite ghat gives the symmetric PSD
/// square root of -ghat (then A^T A = A^2 = -ghat). nullopt otherwise.
inline std::optional<Eigen::MatrixXd> solve_riccati_constant(const Eigen::MatrixXd& ghat, double tol = 1e-12) {
    const double scale = 1.0 + detail::max_abs(ghat);
    if (detail::max_abs(ghat - ghat.transpose()) > tol * scale) return std::nullopt;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-0.5 * (ghat + ghat.transpose()));
    if (eig.eigenvalues().minCoeff() < -tol * scale) return std::nullopt;
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// Constant-A Riccati solution on a grid.
inline RiccatiSolution constant_riccati(const Grid& grid, const Eigen::MatrixXd& a) {
    return RiccatiSolution(grid, std::vector<Eigen::MatrixXd>(grid.size(), a),
                           std::vector<Eigen::MatrixXd>(grid.size(), Eigen::MatrixXd::Zero(a.rows(), a.cols())),
                           DriftMethod::Constant);
}

/// Scalar A via A = z'/z where z'' + ghat z = 0, z(0) = 1, z'(0) = a0.
///
/// Integrated with classical RK4 at `substeps` steps per grid interval. Throws
/// RiccatiBlowUp when z crosses zero or |z| < z_floor.
inline RiccatiSolution solve_riccati_logderiv(const std::function<double(double)>& ghat, const Grid& grid, double a0,
                                              const RiccatiOptions& opt = {}) {
    const std::size_t m = grid.intervals();
    const double h = grid.step() / static_cast<double>(opt.substeps);
    std::vector<Eigen::MatrixXd> a(grid.size());
    std::vector<Eigen::MatrixXd> a_dot(grid.size());
    double z = 1.0;
    double zp = a0;
    const auto record = [&](std::size_t i) {
        const double t = grid.node(i);
        const double ai = zp / z;
        a[i] = Eigen::MatrixXd::Constant(1, 1, ai);
        a_dot[i] = Eigen::MatrixXd::Constant(1, 1, -ghat(t) - ai * ai);
    };
    record(0);
    for (std::size_t i = 0; i < m; ++i) {
        const double t0 = grid.node(i);
        for (std::size_t k = 0; k < opt.substeps; ++k) {
            const double t = t0 + static_cast<double>(k) * h;
            const double g1 = ghat(t);
            const double g2 = ghat(t + 0.5 * h);
            const double g3 = ghat(t + h);
            const double k1z = zp;
            const double k1p = -g1 * z;
            const double k2z = zp + 0.5 * h * k1p;
            const double k2p = -g2 * (z + 0.5 * h * k1z);
            const double k3z = zp + 0.5 * h * k2p;
            const double k3p = -g2 * (z + 0.5 * h * k2z);
            const double k4z = zp + h * k3p;
            const double k4p = -g3 * (z + h * k3z);
            const double z_next = z + h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
            const double zp_next = zp + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
            if (!std::isfinite(z_next) || !std::isfinite(zp_next)) {
                throw RiccatiBlowUp("linearized solution diverged", t + h);
            }
            if ((z > 0.0) != (z_next > 0.0)) {
                const double crossing = t + h * z / (z - z_next);
                throw RiccatiBlowUp("z crosses zero", crossing);
            }
            if (std::abs(z_next) < opt.z_floor) throw RiccatiBlowUp("|z| below floor", t + h);
            z = z_next;
            zp = zp_next;
        }
        record(i + 1);
    }
    return RiccatiSolution(grid, std::move(a), std::move(a_dot), DriftMethod::LogDeriv);
}

/// RK4 on A' = -ghat - A^T A from A(0) = a0. Throws RiccatiBlowUp when |A| exceeds
/// the blow-up norm (max-abs entry) or becomes non-finite.
inline RiccatiSolution solve_riccati_direct(const MatrixFunction& ghat, const Grid& grid, const Eigen::MatrixXd& a0,
                                            const RiccatiOptions& opt = {}) {
    const std::size_t m = grid.intervals();
    const double h = grid.step() / static_cast<double>(opt.substeps);
    const auto rhs = [](const Eigen::MatrixXd& g, const Eigen::MatrixXd& a) -> Eigen::MatrixXd {
        return -g - a.transpose() * a;
    };
    std::vector<Eigen::MatrixXd> a(grid.size());
    std::vector<Eigen::MatrixXd> a_dot(grid.size());
    Eigen::MatrixXd state = a0;
    a[0] = state;
    a_dot[0] = rhs(ghat(0.0), state);
    for (std::size_t i = 0; i < m; ++i) {
        const double t0 = grid.node(i);
        for (std::size_t k = 0; k < opt.substeps; ++k) {
            const double t = t0 + static_cast<double>(k) * h;
            const Eigen::MatrixXd g1 = ghat(t);
            const Eigen::MatrixXd g2 = ghat(t + 0.5 * h);
            const Eigen::MatrixXd g3 = ghat(t + h);
            const Eigen::MatrixXd k1 = rhs(g1, state);
            const Eigen::MatrixXd k2 = rhs(g2, state + 0.5 * h * k1);
            const Eigen::MatrixXd k3 = rhs(g2, state + 0.5 * h * k2);
            const Eigen::MatrixXd k4 = rhs(g3, state + h * k3);
            state += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!state.allFinite() || detail::max_abs(state) > opt.blowup_norm) {
                throw RiccatiBlowUp("|A| exceeded the blow-up threshold", t + h);
            }
        }
        a[i + 1] = state;
        a_dot[i + 1] = rhs(ghat(grid.node(i + 1)), state);
    }
    return RiccatiSolution(grid, std::move(a), std::move(a_dot), DriftMethod::Direct);
}

/// Scalar convenience overload.
inline RiccatiSolution solve_riccati_direct(const std::function<double(double)>& ghat, const Grid& grid, double a0,
                                            const RiccatiOptions& opt = {}) {
    return solve_riccati_direct([&](double t) { return Eigen::MatrixXd::Constant(1, 1, ghat(t)); }, grid,
                                Eigen::MatrixXd::Constant(1, 1, a0), opt);
}

/// RK4 on D' = -hhat - A^T D from D(0) = d0, with A Hermite-interpolated between nodes.
inline DriftPair solve_D(const RiccatiSolution& a, const VectorFunction& hhat, const Eigen::VectorXd& d0,
                         const RiccatiOptions& opt = {}) {
    const Grid& grid = a.grid();
    const double h = grid.step() / static_cast<double>(opt.substeps);
    const auto rhs = [&](double t, const Eigen::MatrixXd& at, const Eigen::VectorXd& d) -> Eigen::VectorXd {
        return -hhat(t) - at.transpose() * d;
    };
    std::vector<Eigen::VectorXd> d(grid.size());
    std::vector<Eigen::VectorXd> d_dot(grid.size());
    Eigen::VectorXd state = d0;
    d[0] = state;
    d_dot[0] = rhs(0.0, a.samples()[0], state);
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double t0 = grid.node(i);
        for (std::size_t k = 0; k < opt.substeps; ++k) {
            const double t = t0 + static_cast<double>(k) * h;
            const Eigen::MatrixXd a1 = k == 0 ? a.samples()[i] : a.at(t);
            const Eigen::MatrixXd a2 = a.at(t + 0.5 * h);
            const Eigen::MatrixXd a3 = k + 1 == opt.substeps ? a.samples()[i + 1] : a.at(t + h);
            const Eigen::VectorXd k1 = rhs(t, a1, state);
            const Eigen::VectorXd k2 = rhs(t + 0.5 * h, a2, state + 0.5 * h * k1);
            const Eigen::VectorXd k3 = rhs(t + 0.5 * h, a2, state + 0.5 * h * k2);
            const Eigen::VectorXd k4 = rhs(t + h, a3, state + h * k3);
            state += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        if (!state.allFinite()) throw RiccatiBlowUp("solve_D: D diverged", grid.node(i + 1));
        d[i + 1] = state;
        d_dot[i + 1] = rhs(grid.node(i + 1), a.samples()[i + 1], state);
    }
    return DriftPair(a, std::move(d), std::move(d_dot));
}

/// Max residuals of the two drift equations over interior nodes, with A' and D'
/// taken from fourth-order finite differences of the samples.
struct DriftResiduals {
    double riccati = 0.0;  ///< max |A^T A + A' + ghat|
    double d = 0.0;        ///< max |D' + A^T D + hhat|
};

inline DriftResiduals drift_residuals(const DriftPair& drift, const MatrixFunction& ghat, const VectorFunction& hhat) {
    const Grid& grid = drift.grid();
    const double h = grid.step();
    DriftResiduals r;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd& a = drift.A(i);
        const Eigen::MatrixXd a_dot = detail::sample_derivative(drift.A_samples(), i, h);
        const Eigen::VectorXd d_dot = detail::sample_derivative(drift.D_samples(), i, h);
        r.riccati = std::max(r.riccati, detail::max_abs(a.transpose() * a + a_dot + ghat(t)));
        r.d = std::max(r.d, detail::max_abs(d_dot + a.transpose() * drift.D(i) + hhat(t)));
    }
    return r;
}

inline DriftResiduals drift_residuals(const DriftPair& drift, const WeightedCoefficients& w) {
    return drift_residuals(drift, [&](double t) { return w.ghat(t); }, [&](double t) { return w.hhat(t); });
}

struct DriftOptions {
    DriftStrategy strategy = DriftStrategy::Auto;
    /// Initial A(0). Default: the stabilizing root sqrt(max(0, -ghat(0))).
    std::optional<Eigen::MatrixXd> a0;
    /// Initial D(0). Default: zero.
    std::optional<Eigen::VectorXd> d0;
    RiccatiOptions riccati;
    double residual_tol = 1e-6;
};

/// Symmetric PSD square root of the NSD part of ghat(0) (scalar: sqrt(max(0, -ghat(0)))).
inline Eigen::MatrixXd default_a0(const Eigen::MatrixXd& ghat0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-0.5 * (ghat0 + ghat0.transpose()));
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

/// Build the drift pair for the weighted problem.
///
/// Auto tries constant (constant ghat with an admissible root), then logderiv
/// (scalar only), then direct, keeping the first result whose residuals are
/// within `residual_tol`. Systems require symmetric ghat so that A stays symmetric.
inline DriftPair build_drift(const WeightedCoefficients& w, const DriftOptions& opt = {}) {
    const Grid& grid = w.grid();
    const auto n = static_cast<Eigen::Index>(w.dimension());
    const MatrixFunction ghat = [&w](double t) { return w.ghat(t); };
    const VectorFunction hhat = [&w](double t) { return w.hhat(t); };

    if (n > 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Eigen::MatrixXd g = w.ghat(grid.node(i));
            if (detail::max_abs(g - g.transpose()) > 1e-12 * (1.0 + detail::max_abs(g))) {
                throw ConfigError("system drift requires a symmetric weighted g(t); asymmetry at t=" +
                                  std::to_string(grid.node(i)));
            }
        }
        if (opt.a0 && detail::max_abs(*opt.a0 - opt.a0->transpose()) > 0.0) {
            throw ConfigError("system drift requires a symmetric A0");
        }
    }
    if (opt.a0 && opt.a0->rows() != n) throw ConfigError("A0 has the wrong dimension");
    const Eigen::MatrixXd a0 = opt.a0 ? *opt.a0 : default_a0(w.ghat(0.0));
    const Eigen::VectorXd d0 = opt.d0 ? *opt.d0 : Eigen::VectorXd::Zero(n);
    if (d0.size() != n) throw ConfigError("D0 has the wrong dimension");

    std::vector<AllMethodsFailed::Attempt> attempts;
    const auto attempt = [&](DriftMethod method, const auto& make_a) -> std::optional<DriftPair> {
        try {
            RiccatiSolution a = make_a();
            DriftPair drift = solve_D(a, hhat, d0, opt.riccati);
            const DriftResiduals res = drift_residuals(drift, ghat, hhat);
            if (!(res.riccati <= opt.residual_tol) || !(res.d <= opt.residual_tol)) {
                attempts.push_back({to_string(method),
                                    "residuals too large (riccati " + std::to_string(res.riccati) + ", D " +
                                        std::to_string(res.d) + ")",
                                    -1.0});
                return std::nullopt;
            }
            return drift;
        } catch (const RiccatiBlowUp& e) {
            attempts.push_back({to_string(method), e.what(), e.escape_time()});
        } catch (const DomainError& e) {
            attempts.push_back({to_string(method), e.what(), -1.0});
        }
        return std::nullopt;
    };

    const bool want_constant = opt.strategy == DriftStrategy::Auto || opt.strategy == DriftStrategy::Constant;
    const bool want_logderiv = opt.strategy == DriftStrategy::Auto || opt.strategy == DriftStrategy::LogDeriv;
    const bool want_direct = opt.strategy == DriftStrategy::Auto || opt.strategy == DriftStrategy::Direct;

    if (want_constant) {
        if (!w.ghat_is_constant()) {
            attempts.push_back({"constant", "ghat is not constant", -1.0});
        } else {
            const Eigen::MatrixXd g0 = w.ghat(0.0);
            std::optional<Eigen::MatrixXd> root;
            if (opt.a0) {
                // An explicit A0 selects the branch, provided it is a root.
                if (detail::max_abs(opt.a0->transpose() * *opt.a0 + g0) <= 1e-12 * (1.0 + detail::max_abs(g0))) {
                    root = *opt.a0;
                }
            } else {
                root = solve_riccati_constant(g0);
            }
            if (!root) {
                attempts.push_back({"constant", opt.a0 ? "A0 is not a root of A^T A = -ghat" : "ghat is not negative semidefinite", -1.0});
            } else if (auto d = attempt(DriftMethod::Constant, [&] { return constant_riccati(grid, *root); })) {
                return *d;
            }
        }
    }
    if (want_logderiv) {
        if (n != 1) {
            attempts.push_back({"logderiv", "only available for scalar problems", -1.0});
        } else if (auto d = attempt(DriftMethod::LogDeriv, [&] {
                       return solve_riccati_logderiv([&w](double t) { return w.ghat(t)(0, 0); }, grid, a0(0, 0),
                                                     opt.riccati);
                   })) {
            return *d;
        }
    }
    if (want_direct) {
        if (auto d = attempt(DriftMethod::Direct, [&] { return solve_riccati_direct(ghat, grid, a0, opt.riccati); })) {
            return *d;
        }
    }
    throw AllMethodsFailed(std::move(attempts));
}

}  // namespace fkode
