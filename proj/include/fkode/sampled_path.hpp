#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "fkode/errors.hpp"
#include "fkode/grid.hpp"

namespace fkode {

/// Path values on a grid, one n-vector per node.
class SampledPath {
public:
    SampledPath(Grid grid, std::vector<Eigen::VectorXd> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size()) throw GridMismatch("path has " + std::to_string(values_.size()) + " samples for a grid of " + std::to_string(grid_.size()) + " nodes");
    }

    /// Sample fn(t) -> n-vector at every node.
    static SampledPath from_function(const Grid& grid, const std::function<Eigen::VectorXd(double)>& fn) {
        std::vector<Eigen::VectorXd> v(grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.node(i));
        return SampledPath(grid, std::move(v));
    }

    static SampledPath from_scalar(const Grid& grid, const std::function<double(double)>& fn) {
        return from_function(grid, [&](double t) { return Eigen::VectorXd::Constant(1, fn(t)); });
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return values_.front().size(); }
    [[nodiscard]] const Eigen::VectorXd& operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<Eigen::VectorXd>& values() const noexcept { return values_; }

    /// Forward difference (z_{i+1}-z_i)/dt; backward at the last node.
    [[nodiscard]] Eigen::VectorXd forward_derivative(std::size_t i) const {
        const double dt = grid_.step();
        if (i + 1 < values_.size()) return (values_[i + 1] - values_[i]) / dt;
        return (values_[i] - values_[i - 1]) / dt;
    }

    /// Component k as a plain vector.
    [[nodiscard]] std::vector<double> component(Eigen::Index k) const {
        std::vector<double> out(values_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i][k];
        return out;
    }

private:
    Grid grid_;
    std::vector<Eigen::VectorXd> values_;
};

/// max_i |a_i - b_i|_inf over nodes.
inline double sup_distance(const SampledPath& a, const SampledPath& b) {
    if (!(a.grid() == b.grid())) throw GridMismatch("sup_distance: paths on different grids");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return d;
}

}  // namespace fkode
