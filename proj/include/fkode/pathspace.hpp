#pragma once

// Grid-level view of the path-space objects: a discretized mode, Brownian
// sampling of X(t) = int_0^t [A B + D] ds + B(t), Monte Carlo estimates of the
// control Lagrangian, the Onsager-Machlup value and the Cameron-Martin KL shift.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "fkode/errors.hpp"
#include "fkode/grid.hpp"
#include "fkode/riccati.hpp"
#include "fkode/sampled_path.hpp"
#include "fkode/tridiagonal.hpp"

namespace fkode {

/// Minimizer of the grid functional
///
///   1/2 sum_i dt || (z_{i+1} - z_i)/dt - 1/2 (A_i z_i + A_{i+1} z_{i+1}) - 1/2 (D_i + D_{i+1}) ||^2
///
/// with z_0 = 0, z_m = a. Trapezoidal averaging of the drift keeps the scheme
/// second order. The normal equations are block tridiagonal and symmetric.
inline SampledPath discrete_mode(const DriftPair& drift, const Eigen::VectorXd& terminal) {
    const Grid& grid = drift.grid();
    const std::size_t m = grid.intervals();
    const Eigen::Index n = drift.dimension();
    if (terminal.size() != n) throw GridMismatch("discrete_mode: terminal value dimension mismatch");
    const double dt = grid.step();
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    // Cell residual r_i = P_i z_{i+1} - Q_i z_i - Dbar_i (scaled by dt).
    std::vector<Eigen::MatrixXd> p(m);
    std::vector<Eigen::MatrixXd> q(m);
    std::vector<Eigen::VectorXd> dbar(m);
    for (std::size_t i = 0; i < m; ++i) {
        p[i] = eye - 0.5 * dt * drift.A(i + 1);
        q[i] = eye + 0.5 * dt * drift.A(i);
        dbar[i] = 0.5 * dt * (drift.D(i) + drift.D(i + 1));
    }

    const std::size_t unknowns = m - 1;
    std::vector<Eigen::MatrixXd> lower(unknowns, Eigen::MatrixXd::Zero(n, n));
    std::vector<Eigen::MatrixXd> diag(unknowns);
    std::vector<Eigen::MatrixXd> upper(unknowns, Eigen::MatrixXd::Zero(n, n));
    std::vector<Eigen::VectorXd> rhs(unknowns);
    for (std::size_t j = 1; j <= unknowns; ++j) {
        const std::size_t row = j - 1;
        diag[row] = p[j - 1].transpose() * p[j - 1] + q[j].transpose() * q[j];
        rhs[row] = p[j - 1].transpose() * dbar[j - 1] - q[j].transpose() * dbar[j];
        if (j > 1) lower[row] = -p[j - 1].transpose() * q[j - 1];
        if (j < unknowns) upper[row] = -q[j].transpose() * p[j];
        if (j == unknowns) rhs[row] += q[j].transpose() * p[j] * terminal;
    }
    const std::vector<Eigen::VectorXd> interior = block_thomas_solve(lower, diag, upper, rhs);

    std::vector<Eigen::VectorXd> z(grid.size());
    z[0] = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 1; j <= unknowns; ++j) z[j] = interior[j - 1];
    z[m] = terminal;
    return SampledPath(grid, std::move(z));
}

inline SampledPath discrete_mode(const DriftPair& drift, double terminal) {
    return discrete_mode(drift, Eigen::VectorXd::Constant(1, terminal));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// P Brownian paths on a grid. Path p is drawn from its own generator seeded by
/// splitmix64(seed, p), so any path can be regenerated independently and results
/// never depend on how paths are partitioned across workers.
class BrownianEnsemble {
public:
    BrownianEnsemble(Grid grid, std::size_t paths, std::uint64_t seed, Eigen::Index dimension = 1)
        : grid_(grid), paths_(paths), seed_(seed), dimension_(dimension) {
        if (paths == 0) throw ConfigError("ensemble needs at least one path");
        if (dimension < 1) throw ConfigError("ensemble dimension must be positive");
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t paths() const noexcept { return paths_; }
    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return dimension_; }

    /// B(t_i) for path p; out is resized to the grid.
    void path(std::size_t p, std::vector<Eigen::VectorXd>& out) const {
        std::mt19937_64 rng(detail::splitmix64(seed_ ^ detail::splitmix64(static_cast<std::uint64_t>(p))));
        std::normal_distribution<double> normal(0.0, 1.0);
        const double scale = std::sqrt(grid_.step());
        out.resize(grid_.size());
        out[0] = Eigen::VectorXd::Zero(dimension_);
        for (std::size_t i = 1; i < out.size(); ++i) {
            out[i].resize(dimension_);
            for (Eigen::Index k = 0; k < dimension_; ++k) out[i][k] = out[i - 1][k] + scale * normal(rng);
        }
    }

private:
    Grid grid_;
    std::size_t paths_;
    std::uint64_t seed_;
    Eigen::Index dimension_;
};

/// X from B by trapezoidal integration of A(s) B(s) + D(s).
inline void integrate_drift(const DriftPair& drift, const std::vector<Eigen::VectorXd>& b,
                            std::vector<Eigen::VectorXd>& x) {
    const double dt = drift.grid().step();
    x.resize(b.size());
    Eigen::VectorXd integral = Eigen::VectorXd::Zero(drift.dimension());
    Eigen::VectorXd prev = drift.A(0) * b[0] + drift.D(0);
    x[0] = b[0];
    for (std::size_t i = 1; i < b.size(); ++i) {
        Eigen::VectorXd cur = drift.A(i) * b[i] + drift.D(i);
        integral += 0.5 * dt * (prev + cur);
        x[i] = integral + b[i];
        prev = std::move(cur);
    }
}

/// Visit every sampled X path: visitor(p, X) with X on the drift grid.
inline void sample_paths(const DriftPair& drift, std::size_t paths, std::uint64_t seed,
                         const std::function<void(std::size_t, const std::vector<Eigen::VectorXd>&)>& visitor) {
    const BrownianEnsemble ensemble(drift.grid(), paths, seed, drift.dimension());
    std::vector<Eigen::VectorXd> b;
    std::vector<Eigen::VectorXd> x;
    for (std::size_t p = 0; p < paths; ++p) {
        ensemble.path(p, b);
        integrate_drift(drift, b, x);
        visitor(p, x);
    }
}

/// Per-node ensemble moments plus the first `keep` trajectories.
struct EnsembleStatistics {
    std::size_t paths = 0;
    std::vector<Eigen::VectorXd> mean;
    std::vector<Eigen::VectorXd> variance;  ///< unbiased
    Eigen::VectorXd terminal_variance_se;    ///< standard error of variance at t = T
    std::vector<SampledPath> trajectories;
};

inline EnsembleStatistics sample_statistics(const DriftPair& drift, std::size_t paths, std::uint64_t seed,
                                            std::size_t keep = 0) {
    const Grid& grid = drift.grid();
    const Eigen::Index n = drift.dimension();
    EnsembleStatistics stats;
    stats.paths = paths;
    std::vector<Eigen::VectorXd> mean(grid.size(), Eigen::VectorXd::Zero(n));
    std::vector<Eigen::VectorXd> m2(grid.size(), Eigen::VectorXd::Zero(n));
    std::vector<Eigen::VectorXd> terminal;
    terminal.reserve(paths);
    sample_paths(drift, paths, seed, [&](std::size_t p, const std::vector<Eigen::VectorXd>& x) {
        const double count = static_cast<double>(p + 1);
        for (std::size_t i = 0; i < x.size(); ++i) {
            const Eigen::VectorXd delta = x[i] - mean[i];
            mean[i] += delta / count;
            m2[i] += delta.cwiseProduct(x[i] - mean[i]);
        }
        terminal.push_back(x.back());
        if (p < keep) stats.trajectories.emplace_back(grid, x);
    });
    stats.mean = mean;
    stats.variance.resize(grid.size());
    const double denom = paths > 1 ? static_cast<double>(paths - 1) : 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) stats.variance[i] = m2[i] / denom;

    // SE of the sample variance: sqrt((mu4 - sigma^4) / P).
    stats.terminal_variance_se = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double mu = mean.back()[k];
        double m4 = 0.0;
        for (const auto& x : terminal) m4 += std::pow(x[k] - mu, 4);
        m4 /= static_cast<double>(paths);
        const double var = stats.variance.back()[k];
        stats.terminal_variance_se[k] = std::sqrt(std::max(0.0, m4 - var * var) / static_cast<double>(paths));
    }
    return stats;
}

namespace detail {

inline double trapezoid_weight(std::size_t i, const Grid& grid) {
    const double dt = grid.step();
    return (i == 0 || i == grid.intervals()) ? 0.5 * dt : dt;
}

}  // namespace detail

struct MonteCarloEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// 1/2 int E||z' - A (B + z) - D||^2 dt estimated from P Brownian paths
/// (trapezoid in t, forward-difference z').
inline MonteCarloEstimate mc_lagrangian(const SampledPath& z, const DriftPair& drift, std::size_t paths,
                                        std::uint64_t seed) {
    const Grid& grid = drift.grid();
    if (!(z.grid() == grid)) throw GridMismatch("mc_lagrangian: path and drift on different grids");
    const BrownianEnsemble ensemble(grid, paths, seed, drift.dimension());
    std::vector<Eigen::VectorXd> zdot(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) zdot[i] = z.forward_derivative(i);
    std::vector<Eigen::VectorXd> b;
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t p = 0; p < paths; ++p) {
        ensemble.path(p, b);
        double value = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            value += detail::trapezoid_weight(i, grid) * (zdot[i] - drift.A(i) * (b[i] + z[i]) - drift.D(i)).squaredNorm();
        }
        value *= 0.5;
        const double delta = value - mean;
        mean += delta / static_cast<double>(p + 1);
        m2 += delta * (value - mean);
    }
    const double var = paths > 1 ? m2 / static_cast<double>(paths - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(paths))};
}

/// The same functional with the Brownian expectation taken in closed form, on the
/// same grid and derivative convention as mc_lagrangian.
inline double lagrangian_quadrature(const SampledPath& z, const DriftPair& drift) {
    const Grid& grid = drift.grid();
    if (!(z.grid() == grid)) throw GridMismatch("lagrangian_quadrature: path and drift on different grids");
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Eigen::VectorXd r = z.forward_derivative(i) - drift.A(i) * z[i] - drift.D(i);
        sum += detail::trapezoid_weight(i, grid) * (r.squaredNorm() + drift.A(i).squaredNorm() * grid.node(i));
    }
    return 0.5 * sum;
}

/// OM value  int <A z + D, dz> + 1/2 int ||z'||^2  for a deterministic path.
/// The Stieltjes integral uses the trapezoidal average of the integrand on each cell.
inline double om_value(const SampledPath& z, const DriftPair& drift) {
    const Grid& grid = drift.grid();
    if (!(z.grid() == grid)) throw GridMismatch("om_value: path and drift on different grids");
    const double dt = grid.step();
    double stieltjes = 0.0;
    double energy = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const Eigen::VectorXd dz = z[i + 1] - z[i];
        const Eigen::VectorXd left = drift.A(i) * z[i] + drift.D(i);
        const Eigen::VectorXd right = drift.A(i + 1) * z[i + 1] + drift.D(i + 1);
        stieltjes += 0.5 * (left + right).dot(dz);
        energy += dz.squaredNorm() / dt;
    }
    return stieltjes + 0.5 * energy;
}

/// Squared Cameron-Martin norm  int ||h'||^2  of a grid path (piecewise linear).
inline double cameron_martin_norm2(const SampledPath& h) {
    const double dt = h.grid().step();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < h.size(); ++i) sum += (h[i + 1] - h[i]).squaredNorm() / dt;
    return sum;
}

/// KL divergence between the shifts of Wiener measure by h1 and h2:
/// 1/2 ||h1 - h2||^2 in the Cameron-Martin norm.
inline double kl_shift(const SampledPath& h1, const SampledPath& h2) {
    if (!(h1.grid() == h2.grid())) throw GridMismatch("kl_shift: paths on different grids");
    const double dt = h1.grid().step();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < h1.size(); ++i) {
        const Eigen::VectorXd inc = (h1[i + 1] - h2[i + 1]) - (h1[i] - h2[i]);
        sum += inc.squaredNorm() / dt;
    }
    return 0.5 * sum;
}

}  // namespace fkode
