#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fkode/errors.hpp"

namespace fkode {

/// Legendre P_0..P_n and their derivatives at s in [-1, 1], by the three-term
/// recurrence and P'_{j+1} = P'_{j-1} + (2j+1) P_j.
inline void legendre_table(double s, std::size_t n, std::vector<double>& p, std::vector<double>& dp) {
    p.assign(n + 1, 0.0);
    dp.assign(n + 1, 0.0);
    p[0] = 1.0;
    if (n == 0) return;
    p[1] = s;
    dp[1] = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
        const auto jd = static_cast<double>(j);
        p[j + 1] = ((2 * jd + 1) * s * p[j] - jd * p[j - 1]) / (jd + 1);
        dp[j + 1] = dp[j - 1] + (2 * jd + 1) * p[j];
    }
}

/// Gauss-Legendre rule with k nodes mapped to [0, T]. Exact for polynomials of
/// degree <= 2k - 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t order() const noexcept { return nodes.size(); }

    template <typename F>
    [[nodiscard]] double integrate(F&& f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
        return sum;
    }
};

/// Nodes on [-1, 1] by Newton iteration on P_k from the Chebyshev-like initial guess.
inline QuadratureRule gauss_legendre(std::size_t k, double lo, double hi) {
    if (k == 0) throw Error("Gauss-Legendre order must be positive");
    QuadratureRule rule;
    rule.nodes.resize(k);
    rule.weights.resize(k);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const std::size_t pairs = (k + 1) / 2;
    for (std::size_t i = 0; i < pairs; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(k) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t j = 1; j < k; ++j) {
                const auto jd = static_cast<double>(j);
                const double p2 = ((2 * jd + 1) * x * p1 - jd * p0) / (jd + 1);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(k) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t j = 1; j < k; ++j) {
                const auto jd = static_cast<double>(j);
                const double p2 = ((2 * jd + 1) * x * p1 - jd * p0) / (jd + 1);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(k) * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.weights[i] = half * w;
        rule.nodes[k - 1 - i] = mid + half * x;
        rule.weights[k - 1 - i] = half * w;
    }
    if (k % 2 == 1) rule.nodes[k / 2] = mid;
    return rule;
}

inline QuadratureRule gauss_legendre(std::size_t k, double horizon) { return gauss_legendre(k, 0.0, horizon); }

/// Composite rule: `per_cell` Gauss points on each of `cells` equal subintervals of [0, T].
inline QuadratureRule composite_gauss_legendre(std::size_t per_cell, std::size_t cells, double horizon) {
    QuadratureRule out;
    out.nodes.reserve(per_cell * cells);
    out.weights.reserve(per_cell * cells);
    const QuadratureRule unit = gauss_legendre(per_cell, 0.0, 1.0);
    for (std::size_t c = 0; c < cells; ++c) {
        const double lo = horizon * static_cast<double>(c) / static_cast<double>(cells);
        const double hi = horizon * static_cast<double>(c + 1) / static_cast<double>(cells);
        for (std::size_t q = 0; q < per_cell; ++q) {
            out.nodes.push_back(lo + (hi - lo) * unit.nodes[q]);
            out.weights.push_back((hi - lo) * unit.weights[q]);
        }
    }
    return out;
}

}  // namespace fkode
