#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fkode/errors.hpp"

namespace fkode {

/// Thomas algorithm for  lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]
/// (lower[0] and upper[n-1] unused). No pivoting; a vanishing pivot throws
/// SingularSystem with its row.
inline std::vector<double> thomas_solve(const std::vector<double>& lower, const std::vector<double>& diag,
                                        const std::vector<double>& upper, const std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) throw GridMismatch("thomas_solve: size mismatch");
    std::vector<double> c(n, 0.0);
    std::vector<double> d(n, 0.0);
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double correction = i == 0 ? 0.0 : lower[i] * c[i - 1];
        const double pivot = diag[i] - correction;
        if (!(std::abs(pivot) > 1e-13 * (std::abs(diag[i]) + std::abs(correction))) || !std::isfinite(pivot)) {
            throw SingularSystem("tridiagonal system is singular", i);
        }
        c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - (i == 0 ? 0.0 : lower[i] * d[i - 1])) / pivot;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

/// Block Thomas for  L[i] x[i-1] + B[i] x[i] + U[i] x[i+1] = r[i].
inline std::vector<Eigen::VectorXd> block_thomas_solve(const std::vector<Eigen::MatrixXd>& lower,
                                                       const std::vector<Eigen::MatrixXd>& diag,
                                                       const std::vector<Eigen::MatrixXd>& upper,
                                                       const std::vector<Eigen::VectorXd>& rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) throw GridMismatch("block_thomas_solve: size mismatch");
    std::vector<Eigen::MatrixXd> c(n);
    std::vector<Eigen::VectorXd> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd pivot = diag[i];
        Eigen::VectorXd r = rhs[i];
        if (i > 0) {
            pivot -= lower[i] * c[i - 1];
            r -= lower[i] * d[i - 1];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(pivot);
        lu.setThreshold(1e-13);
        if (!lu.isInvertible() || !pivot.allFinite()) throw SingularSystem("block tridiagonal system is singular", i);
        if (i + 1 < n) c[i] = lu.solve(upper[i]);
        d[i] = lu.solve(r);
    }
    std::vector<Eigen::VectorXd> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace fkode
