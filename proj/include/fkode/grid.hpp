#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fkode/errors.hpp"

namespace fkode {

/// Uniform grid 0 = t_0 < ... < t_m = T.
class Grid {
public:
    Grid(double horizon, std::size_t intervals) : horizon_(horizon), intervals_(intervals) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("grid horizon must be positive");
        if (intervals < 2) throw ConfigError("grid needs at least 2 intervals");
    }

    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] std::size_t intervals() const noexcept { return intervals_; }
    [[nodiscard]] std::size_t size() const noexcept { return intervals_ + 1; }
    [[nodiscard]] double step() const noexcept { return horizon_ / static_cast<double>(intervals_); }

    // Computed as T*i/m so the last node is T exactly.
    [[nodiscard]] double node(std::size_t i) const noexcept {
        if (i == intervals_) return horizon_;
        return horizon_ * static_cast<double>(i) / static_cast<double>(intervals_);
    }

    [[nodiscard]] std::vector<double> nodes() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
        return out;
    }

    /// Index of the cell [t_i, t_{i+1}] containing t (clamped to the grid).
    [[nodiscard]] std::size_t cell(double t) const noexcept {
        if (!(t > 0.0)) return 0;
        const auto i = static_cast<std::size_t>(std::floor(t / step()));
        return std::min(i, intervals_ - 1);
    }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.horizon_ == b.horizon_ && a.intervals_ == b.intervals_;
    }

private:
    double horizon_;
    std::size_t intervals_;
};

}  // namespace fkode
