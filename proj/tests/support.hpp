#pragma once

// Small generators for the property tests. Every generator draws from a
// caller-owned engine so failures reproduce from the fixed seed.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fkode::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int integer(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline std::vector<double> points(Rng& rng, std::size_t count, double lo, double hi) {
    std::vector<double> out(count);
    for (auto& x : out) x = uniform(rng, lo, hi);
    return out;
}

/// Polynomial coefficients c0..c_degree, each in [-range, range].
inline std::vector<double> polynomial(Rng& rng, int degree, double range = 2.0) {
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (auto& x : c) x = uniform(rng, -range, range);
    return c;
}

inline std::string polynomial_text(const std::vector<double>& c) {
    std::string s;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (k) s += " + ";
        s += "(" + std::to_string(c[k]) + ")";
        if (k == 1) s += "*t";
        if (k > 1) s += "*t^" + std::to_string(k);
    }
    return s;
}

/// Random expression text in t that is finite on [0, 2]: sqrt and log only see
/// arguments >= 1, division only by 1 + (something)^2.
inline std::string expression_text(Rng& rng, int depth) {
    if (depth <= 0 || integer(rng, 0, 4) == 0) {
        switch (integer(rng, 0, 2)) {
            case 0: return "t";
            case 1: return std::to_string(integer(rng, 1, 9));
            default: return "(" + std::to_string(uniform(rng, -3.0, 3.0)) + ")";
        }
    }
    const std::string a = expression_text(rng, depth - 1);
    switch (integer(rng, 0, 10)) {
        case 0: return "(" + a + " + " + expression_text(rng, depth - 1) + ")";
        case 1: return "(" + a + " - " + expression_text(rng, depth - 1) + ")";
        case 2: return a + " * " + expression_text(rng, depth - 1);
        case 3: return a + " / (1 + (" + expression_text(rng, depth - 1) + ")^2)";
        case 4: return "sin(" + a + ")";
        case 5: return "cos(" + a + ")";
        case 6: return "exp(sin(" + a + "))";
        case 7: return "sqrt(1 + (" + a + ")^2)";
        case 8: return "log(2 + cos(" + a + "))";
        case 9: return "-(" + a + ")";
        default: return "(" + a + ")^" + std::to_string(integer(rng, 0, 3));
    }
}

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index n, double max_norm) {
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = uniform(rng, -1.0, 1.0);
    const double scale = uniform(rng, 0.0, max_norm) / std::max(m.norm(), 1e-300);
    return m * scale;
}

}  // namespace fkode::testing
