#pragma once

// End-to-end solve: weight, build the drift, minimize, unweight.

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fkode/grid.hpp"
#include "fkode/problem.hpp"
#include "fkode/riccati.hpp"
#include "fkode/sampled_path.hpp"
#include "fkode/transform.hpp"
#include "fkode/variational.hpp"

namespace fkode {

struct SolveOptions {
    std::size_t degree = 20;
    std::size_t grid = 512;
    DriftOptions drift;
    std::optional<std::size_t> quad_order;
};

struct StageTime {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineResult {
    std::shared_ptr<const WeightedCoefficients> weighted;
    DriftPair drift;
    DriftResiduals drift_residuals;
    ModeSolution mode;
    double el_residual = 0.0;  ///< against the weighted equation
    SampledPath y;             ///< e^{-V} times the mode
    std::vector<StageTime> timings;

    [[nodiscard]] const Grid& grid() const noexcept { return drift.grid(); }
};

namespace detail {

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

inline PipelineResult solve_pipeline(const Problem& problem, const SolveOptions& opt = {}) {
    const Grid grid(problem.horizon(), opt.grid);
    detail::Stopwatch clock;
    std::vector<StageTime> timings;

    auto weighted = std::make_shared<const WeightedCoefficients>(problem, grid);
    timings.push_back({"transform", clock.lap()});

    DriftPair drift = build_drift(*weighted, opt.drift);
    DriftResiduals residuals = drift_residuals(drift, *weighted);
    timings.push_back({"build_drift", clock.lap()});

    ModeSolution mode = minimize(drift, weighted->terminal_hat(), opt.degree, opt.quad_order);
    const double el = el_residual(mode, *weighted);
    timings.push_back({"minimize", clock.lap()});

    SampledPath y = unweight(mode.samples, *weighted);
    timings.push_back({"unweight", clock.lap()});

    return PipelineResult{std::move(weighted), std::move(drift), residuals, std::move(mode), el, std::move(y),
                          std::move(timings)};
}

}  // namespace fkode
