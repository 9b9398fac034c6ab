#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace fkode {

/// e^M by scaling and squaring around a degree-6 Taylor polynomial.
///
/// M is scaled by 2^-s until its 1-norm is at most 1/64; the truncation term
/// (1/64)^7/7! is then below 1e-16 relative, and s squarings undo the scaling.
inline Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 1.0 / 64.0) squarings = static_cast<int>(std::ceil(std::log2(norm * 64.0)));
    const Eigen::MatrixXd x = m / std::ldexp(1.0, squarings);

    // Horner: I + x(I + x/2(I + x/3(...(I + x/6))))
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    for (int k = 6; k >= 1; --k) {
        result = Eigen::MatrixXd::Identity(n, n) + (x * result) / static_cast<double>(k);
    }
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

inline double matrix_exp(double x) { return std::exp(x); }

}  // namespace fkode
