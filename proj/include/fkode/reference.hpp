#pragma once

// Independent oracles: a second-order finite-difference BVP solver and
// closed-form or series solutions for the example gallery.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fkode/errors.hpp"
#include "fkode/grid.hpp"
#include "fkode/problem.hpp"
#include "fkode/sampled_path.hpp"
#include "fkode/transform.hpp"
#include "fkode/tridiagonal.hpp"

namespace fkode {

/// y'' + f y' + g y + h = 0 on [0, T], y(0) = 0, y(T) = a.
struct LinearBvp {
    Eigen::Index n = 1;
    double horizon = 1.0;
    Eigen::VectorXd terminal;
    MatrixFunction f;
    MatrixFunction g;
    VectorFunction h;

    static LinearBvp from_problem(const Problem& p) {
        LinearBvp bvp;
        bvp.n = static_cast<Eigen::Index>(p.dimension());
        bvp.horizon = p.horizon();
        bvp.terminal = p.terminal();
        auto shared = std::make_shared<const Problem>(p);
        bvp.f = [shared](double t) { return shared->f(t); };
        bvp.g = [shared](double t) { return shared->g(t); };
        bvp.h = [shared](double t) { return shared->h(t); };
        return bvp;
    }

    /// The weighted equation  yhat'' + ghat yhat + hhat = 0  with its hatted terminal value.
    /// Holds a reference to w.
    static LinearBvp from_weighted(const WeightedCoefficients& w) {
        LinearBvp bvp;
        bvp.n = static_cast<Eigen::Index>(w.dimension());
        bvp.horizon = w.horizon();
        bvp.terminal = w.terminal_hat();
        const Eigen::Index n = bvp.n;
        bvp.f = [n](double) { return Eigen::MatrixXd::Zero(n, n).eval(); };
        bvp.g = [&w](double t) { return w.ghat(t); };
        bvp.h = [&w](double t) { return w.hhat(t); };
        return bvp;
    }
};

/// Central differences on m uniform cells:
///   (y+ - 2y + y-)/dt^2 + f (y+ - y-)/(2dt) + g y + h = 0.
/// Scalar problems go through the Thomas algorithm, systems through block Thomas.
inline SampledPath fd_bvp_solve(const LinearBvp& bvp, std::size_t m) {
    if (m < 8) throw ConfigError("fd_bvp_solve needs at least 8 cells");
    if (bvp.terminal.size() != bvp.n) throw GridMismatch("fd_bvp_solve: terminal value dimension mismatch");
    const Grid grid(bvp.horizon, m);
    const double dt = grid.step();
    const double inv2 = 1.0 / (dt * dt);
    const std::size_t unknowns = m - 1;
    std::vector<Eigen::VectorXd> y(grid.size());
    y[0] = Eigen::VectorXd::Zero(bvp.n);
    y[m] = bvp.terminal;

    if (bvp.n == 1) {
        std::vector<double> lower(unknowns);
        std::vector<double> diag(unknowns);
        std::vector<double> upper(unknowns);
        std::vector<double> rhs(unknowns);
        for (std::size_t i = 1; i <= unknowns; ++i) {
            const double t = grid.node(i);
            const double fi = bvp.f(t)(0, 0);
            lower[i - 1] = inv2 - fi / (2 * dt);
            diag[i - 1] = -2 * inv2 + bvp.g(t)(0, 0);
            upper[i - 1] = inv2 + fi / (2 * dt);
            rhs[i - 1] = -bvp.h(t)[0];
        }
        rhs[unknowns - 1] -= upper[unknowns - 1] * bvp.terminal[0];
        const std::vector<double> x = thomas_solve(lower, diag, upper, rhs);
        for (std::size_t i = 1; i <= unknowns; ++i) y[i] = Eigen::VectorXd::Constant(1, x[i - 1]);
        return SampledPath(grid, std::move(y));
    }

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(bvp.n, bvp.n);
    std::vector<Eigen::MatrixXd> lower(unknowns);
    std::vector<Eigen::MatrixXd> diag(unknowns);
    std::vector<Eigen::MatrixXd> upper(unknowns);
    std::vector<Eigen::VectorXd> rhs(unknowns);
    for (std::size_t i = 1; i <= unknowns; ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd fi = bvp.f(t);
        lower[i - 1] = inv2 * eye - fi / (2 * dt);
        diag[i - 1] = -2 * inv2 * eye + bvp.g(t);
        upper[i - 1] = inv2 * eye + fi / (2 * dt);
        rhs[i - 1] = -bvp.h(t);
    }
    rhs[unknowns - 1] -= upper[unknowns - 1] * bvp.terminal;
    const std::vector<Eigen::VectorXd> x = block_thomas_solve(lower, diag, upper, rhs);
    for (std::size_t i = 1; i <= unknowns; ++i) y[i] = x[i - 1];
    return SampledPath(grid, std::move(y));
}

inline SampledPath fd_bvp_solve(const Problem& p, std::size_t m) { return fd_bvp_solve(LinearBvp::from_problem(p), m); }

/// Power series of the fundamental solution of z'' = t z with z(0) = 0, z'(0) = 1:
/// t + t^4/12 + t^7/504 + ...
class AirySeries {
public:
    explicit AirySeries(double horizon) {
        // c_{k+3} = c_k / ((k+3)(k+2)), only k = 1 mod 3 survive.
        coeff_.push_back(1.0);
        double c = 1.0;
        std::size_t k = 1;
        const double scale = std::max(1.0, horizon);
        while (true) {
            c /= static_cast<double>((k + 3) * (k + 2));
            k += 3;
            coeff_.push_back(c);
            if (c * std::pow(scale, static_cast<double>(k)) < 1e-16) break;
        }
    }

    [[nodiscard]] std::size_t terms() const noexcept { return coeff_.size(); }

    /// Derivative of order 0, 1 or 2 at t.
    [[nodiscard]] double operator()(double t, int order = 0) const {
        double sum = 0.0;
        for (std::size_t j = 0; j < coeff_.size(); ++j) {
            const auto k = static_cast<int>(3 * j + 1);
            if (k < order) continue;
            double factor = 1.0;
            for (int d = 0; d < order; ++d) factor *= static_cast<double>(k - d);
            sum += coeff_[j] * factor * std::pow(t, k - order);
        }
        return sum;
    }

private:
    std::vector<double> coeff_;
};

/// Solution of y'' - t y = 0, y(0) = 0, y(T) = a, at t.
inline double airy_bvp(double horizon, double terminal, double t) {
    if (t < 0.0 || t > horizon) throw DomainError("airy_bvp: evaluation point outside [0, T]");
    const AirySeries y2(horizon);
    const double end = y2(horizon);
    if (end == 0.0) throw SingularSystem("airy_bvp: resonant boundary data", 0);
    return terminal / end * y2(t);
}

struct GallerySolution {
    std::string id;
    std::string config;  ///< problem in configuration syntax
    std::string note;
    std::function<double(double)> y;
    std::function<double(double)> dy;
    std::function<double(double)> ddy;

    [[nodiscard]] Problem problem() const { return load_problem(config); }
};

inline const std::vector<std::string>& gallery_ids() {
    static const std::vector<std::string> ids{"sinh", "weighted_sinh", "inhomogeneous", "airy"};
    return ids;
}

namespace detail {

inline std::string format_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

inline GallerySolution gallery(std::string_view id, double horizon = 1.0, double terminal = 1.0) {
    if (!(horizon > 0.0)) throw ConfigError("gallery: horizon must be positive");
    GallerySolution s;
    s.id = std::string(id);
    const std::string head = "T = " + detail::format_real(horizon) + "\na = " + detail::format_real(terminal) + "\n";
    const double T = horizon;
    const double a = terminal;
    if (id == "sinh") {
        s.config = head + "f = 0\ng = -1\nh = 0\n";
        s.note = "y'' - y = 0; y = a sinh t / sinh T";
        s.y = [=](double t) { return a * std::sinh(t) / std::sinh(T); };
        s.dy = [=](double t) { return a * std::cosh(t) / std::sinh(T); };
        s.ddy = s.y;
    } else if (id == "weighted_sinh") {
        s.config = head + "f = 1\ng = -1\nh = 0\n";
        s.note = "y'' + y' - y = 0; characteristic roots (-1 +- sqrt 5)/2";
        const double rp = (-1.0 + std::sqrt(5.0)) / 2.0;
        const double rm = (-1.0 - std::sqrt(5.0)) / 2.0;
        const double den = std::exp(rp * T) - std::exp(rm * T);
        s.y = [=](double t) { return a * (std::exp(rp * t) - std::exp(rm * t)) / den; };
        s.dy = [=](double t) { return a * (rp * std::exp(rp * t) - rm * std::exp(rm * t)) / den; };
        s.ddy = [=](double t) { return a * (rp * rp * std::exp(rp * t) - rm * rm * std::exp(rm * t)) / den; };
    } else if (id == "inhomogeneous") {
        s.config = head + "f = 0\ng = -1\nh = t\n";
        s.note = "y'' - y + t = 0; y = t + c sinh t, c = (a - T)/sinh T";
        const double c = (a - T) / std::sinh(T);
        s.y = [=](double t) { return t + c * std::sinh(t); };
        s.dy = [=](double t) { return 1.0 + c * std::cosh(t); };
        s.ddy = [=](double t) { return c * std::sinh(t); };
    } else if (id == "airy") {
        s.config = head + "f = 0\ng = -t\nh = 0\n";
        s.note = "y'' - t y = 0; series fundamental solution";
        const auto series = std::make_shared<AirySeries>(T);
        const double beta = a / (*series)(T);
        s.y = [=](double t) { return beta * (*series)(t, 0); };
        s.dy = [=](double t) { return beta * (*series)(t, 1); };
        s.ddy = [=](double t) { return beta * (*series)(t, 2); };
    } else {
        throw ConfigError("unknown gallery problem '" + std::string(id) + "'");
    }
    return s;
}

}  // namespace fkode
