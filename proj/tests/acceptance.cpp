// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fkode.hpp"
#include "fkode/cli.hpp"

namespace {

using namespace fkode;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SampledPath oracle(const Grid& grid, const std::function<double(double)>& y) {
    return SampledPath::from_scalar(grid, y);
}

Outcome sinh_gallery() {
    Outcome o;
    for (const auto [horizon, terminal] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}}) {
        const auto start = std::chrono::steady_clock::now();
        const auto sol = gallery("sinh", horizon, terminal);
        const auto r = solve_pipeline(sol.problem(), {});
        const double err = sup_distance(r.y, oracle(r.grid(), sol.y));
        const double elapsed = seconds_since(start);
        std::ostringstream what;
        what << "(T,a)=(" << horizon << "," << terminal << ") err " << sci(err) << " in " << sci(elapsed) << "s";
        o.check(err <= 1e-6 && elapsed <= 1.0, what.str());
    }
    return o;
}

Outcome inhomogeneous_gallery() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto sol = gallery("inhomogeneous", 1.0, 2.0);
    SolveOptions opt;
    opt.drift.strategy = DriftStrategy::Constant;
    opt.drift.d0 = Eigen::VectorXd::Zero(1);
    const auto r0 = solve_pipeline(sol.problem(), opt);
    opt.drift.d0 = Eigen::VectorXd::Ones(1);
    const auto r1 = solve_pipeline(sol.problem(), opt);
    const double err = sup_distance(r0.y, oracle(r0.grid(), sol.y));
    const double gauge = sup_distance(r0.y, r1.y);
    const double elapsed = seconds_since(start);
    o.check(std::abs(r0.drift.A(0)(0, 0) - 1.0) < 1e-14, "A = 1");
    o.check(err <= 1e-6, "oracle err " + sci(err));
    o.check(gauge <= 1e-8, "D0=0 vs D0=1 " + sci(gauge));
    o.check(elapsed <= 1.0, "runtime " + sci(elapsed) + "s");
    return o;
}

Outcome weighting() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto sol = gallery("weighted_sinh", 1.0, 1.0);
    const auto r = solve_pipeline(sol.problem(), {});
    const double ghat = r.weighted->ghat(0.5)(0, 0);
    const double err = sup_distance(r.y, oracle(r.grid(), sol.y));
    o.check(std::abs(ghat + 1.25) <= 1e-14, "ghat " + sci(ghat));
    o.check(err <= 1e-4, "derived ghat err " + sci(err));

    // The undamped weighted coefficient -1 gives a visibly different curve.
    const auto wrong_drift = DriftPair::constant(r.grid(), 1.0, 0.0);
    const auto wrong_mode = minimize(wrong_drift, r.weighted->terminal_hat(), 20);
    const double wrong = sup_distance(unweight(wrong_mode.samples, *r.weighted), oracle(r.grid(), sol.y));
    o.check(wrong > 1e-2, "ghat=-1 err " + sci(wrong));
    const double elapsed = seconds_since(start);
    o.check(elapsed <= 1.0, "runtime " + sci(elapsed) + "s");
    return o;
}

Outcome airy_study() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto sol = gallery("airy", 1.0, 2.0);
    const Problem p = sol.problem();
    const Grid grid(1.0, 512);
    const WeightedCoefficients w(p, grid);
    const DriftPair drift = build_drift(w);
    std::vector<double> residuals;
    double sup40 = 0.0;
    for (const std::size_t degree : {5u, 10u, 20u, 30u, 40u}) {
        const auto mode = minimize(drift, w.terminal_hat(), degree);
        residuals.push_back(el_residual(mode, w));
        if (degree == 40) sup40 = sup_distance(unweight(mode.samples, w), oracle(grid, sol.y));
    }
    const double elapsed = seconds_since(start);
    bool decreasing = true;
    std::string trend = "el_residual";
    for (std::size_t k = 0; k < residuals.size(); ++k) {
        trend += " " + sci(residuals[k]);
        if (k > 0) decreasing = decreasing && residuals[k] < residuals[k - 1];
    }
    o.check(decreasing, trend + " strictly decreasing");
    o.check(sup40 <= 1e-2, "N=40 err " + sci(sup40));
    o.check(elapsed <= 10.0, "runtime " + sci(elapsed) + "s");
    return o;
}

Outcome cross_method() {
    Outcome o;
    for (const auto& id : gallery_ids()) {
        const auto p = gallery(id, 1.0, 2.0).problem();
        SolveOptions opt;
        opt.degree = 40;
        const auto r = solve_pipeline(p, opt);
        const auto discrete = unweight(discrete_mode(r.drift, r.weighted->terminal_hat()), *r.weighted);
        const auto fd = fd_bvp_solve(p, 512);
        const double worst =
            std::max({sup_distance(r.y, discrete), sup_distance(r.y, fd), sup_distance(discrete, fd)});
        o.check(worst <= 2e-3, id + " " + sci(worst));
    }
    return o;
}

Outcome mc_identity() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const Grid grid(1.0, 512);
    std::uint64_t seed = 2026;
    double worst_z = 0.0;
    for (const auto& id : gallery_ids()) {
        const WeightedCoefficients w(gallery(id, 1.0, 2.0).problem(), grid);
        const auto drift = build_drift(w);
        const double a = w.terminal_hat()[0];
        const std::vector<std::function<double(double)>> shapes{
            [=](double t) { return a * t; },
            [=](double t) { return a * t * t; },
            [=](double t) { return a * t + std::sin(M_PI * t); },
            [=](double t) { return a * std::sinh(t) / std::sinh(1.0); },
            [=](double t) { return a * t * t * t - 0.5 * t * (1.0 - t); },
        };
        for (const auto& shape : shapes) {
            const auto z = SampledPath::from_scalar(grid, shape);
            const auto mc = mc_lagrangian(z, drift, 10000, ++seed);
            const double quad = lagrangian_quadrature(z, drift);
            const double zscore = std::abs(mc.estimate - quad) / mc.std_error;
            worst_z = std::max(worst_z, zscore);
            if (zscore > 3.0) o.check(false, id + " z=" + sci(zscore));
        }
    }
    const double elapsed = seconds_since(start);
    o.check(worst_z <= 3.0, "20 paths, max |z| " + sci(worst_z));
    o.check(elapsed <= 30.0, "runtime " + sci(elapsed) + "s");
    return o;
}

Outcome kl_formula() {
    Outcome o;
    const Grid grid(1.0, 512);
    const auto zero = SampledPath::from_scalar(grid, [](double) { return 0.0; });
    const auto t = SampledPath::from_scalar(grid, [](double s) { return s; });
    const auto sin = SampledPath::from_scalar(grid, [](double s) { return std::sin(s); });
    const double same = kl_shift(sin, sin);
    const double unit = kl_shift(t, zero);
    const double wave = kl_shift(sin, zero);
    const double hand = 0.5 * (0.5 + std::sin(2.0) / 4.0);
    o.check(same == 0.0, "identical " + sci(same));
    o.check(std::abs(unit - 0.5) <= 1e-6, "line " + sci(unit));
    o.check(std::abs(wave - hand) <= 1e-6, "sin " + std::to_string(wave) + " vs " + std::to_string(hand));
    o.check(kl_shift(t, sin) == kl_shift(sin, t) && kl_shift(zero, sin) == wave, "symmetry exact");
    return o;
}

Outcome systems() {
    Outcome o;
    const auto sys = load_problem("n = 2\nT = 1\na = 1, 1\ng[0][0] = -1\ng[1][1] = -4\n");
    const auto r = solve_pipeline(sys, {});
    const auto c0 = solve_pipeline(load_problem("T = 1\na = 1\ng = -1\n"), {});
    const auto c1 = solve_pipeline(load_problem("T = 1\na = 1\ng = -4\n"), {});
    double worst = 0.0;
    for (std::size_t i = 0; i < r.y.size(); ++i) {
        worst = std::max({worst, std::abs(r.y[i][0] - c0.y[i][0]), std::abs(r.y[i][1] - c1.y[i][0])});
    }
    o.check(worst <= 1e-8, "decoupling " + sci(worst));
    const auto bad = load_problem("n = 2\nT = 1\na = 1, 1\nf[0][1] = 1\ng[1][0] = 1\n");
    bool rejected = false;
    try {
        const WeightedCoefficients w(bad, Grid(1.0, 64));
    } catch (const CommutativityError&) {
        rejected = true;
    }
    o.check(rejected && !commutativity_check(bad, Grid(1.0, 64)), "non-commuting pair rejected");
    return o;
}

Outcome riccati_residuals() {
    Outcome o;
    const std::vector<std::string> configs{
        gallery("sinh").config, gallery("weighted_sinh").config, gallery("inhomogeneous", 1.0, 2.0).config,
        gallery("airy", 1.0, 2.0).config, "n = 2\nT = 1\na = 1, 1\ng[0][0] = -1\ng[1][1] = -4\n",
        "T = 1\na = 1\ng = 1\n"};
    double worst = 0.0;
    for (const auto& text : configs) {
        const Problem p = load_problem(text);
        const WeightedCoefficients w(p, Grid(p.horizon(), 512));
        for (const auto strategy : {DriftStrategy::Auto, DriftStrategy::Direct}) {
            DriftOptions opt;
            opt.strategy = strategy;
            const auto res = drift_residuals(build_drift(w, opt), w);
            worst = std::max({worst, res.riccati, res.d});
        }
    }
    o.check(worst <= 1e-6, "max residual " + sci(worst));

    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run({"solve", std::string(FKODE_CONFIG_DIR) + "/blowup.cfg"}, out, err);
    const std::string text = err.str();
    const auto pos = text.find("escape time: ");
    const double escape = pos == std::string::npos ? -1.0 : std::stod(text.substr(pos + 13));
    o.check(code == 2, "blow-up exit code " + std::to_string(code));
    o.check(std::abs(escape - M_PI / 2) <= 0.01 * M_PI / 2, "escape time " + std::to_string(escape));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 sinh gallery", sinh_gallery},
        {"2 inhomogeneous gallery", inhomogeneous_gallery},
        {"3 weighting", weighting},
        {"4 airy study", airy_study},
        {"5 cross-method agreement", cross_method},
        {"6 Monte Carlo identity", mc_identity},
        {"7 KL shift", kl_formula},
        {"8 systems", systems},
        {"9 Riccati residuals and blow-up", riccati_residuals},
    };
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        const double elapsed = seconds_since(start);
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << " [" << sci(elapsed) << "s]: " << o.detail << '\n';
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << '\n';
    return failures == 0 ? 0 : 1;
}
