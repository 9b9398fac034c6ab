#pragma once

// Command-line front end. cli::run parses arguments and writes CSV to `out`
// (or the --out file) and the run report to `err`.
//
// Exit codes: 0 success, 1 internal error, 2 solver failure (Riccati blow-up,
// singular system), 3 configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fkode/errors.hpp"
#include "fkode/grid.hpp"
#include "fkode/pathspace.hpp"
#include "fkode/pipeline.hpp"
#include "fkode/problem.hpp"
#include "fkode/reference.hpp"
#include "fkode/riccati.hpp"
#include "fkode/transform.hpp"
#include "fkode/variational.hpp"

namespace fkode::cli {

enum ExitCode : int { Success = 0, InternalError = 1, SolverFailure = 2, ConfigFailure = 3 };

/// Minimal CSV writer: header row, 17 significant digits, LF endings.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) { os_ << std::setprecision(17); }

    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) os_ << (i ? "," : "") << names[i];
        os_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << values[i];
        os_ << '\n';
    }

private:
    std::ostream& os_;
};

/// Output sink: "-" is the provided stream, anything else a file.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path), stream_(&fallback) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
            stream_ = file_.get();
        }
    }

    std::ostream& stream() { return *stream_; }
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

struct CommonOptions {
    std::string config;
    std::size_t degree = 20;
    std::size_t grid = 512;
    std::string strategy = "auto";
    std::optional<double> a0;
    std::optional<double> d0;
    std::string out = "-";
    std::string report_format = "text";
};

namespace detail {

inline std::vector<std::string> columns(const std::string& name, Eigen::Index n) {
    if (n == 1) return {name};
    std::vector<std::string> out;
    for (Eigen::Index k = 0; k < n; ++k) out.push_back(name + "_" + std::to_string(k));
    return out;
}

inline void append(std::vector<double>& row, const Eigen::VectorXd& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) row.push_back(v[k]);
}

inline void append_matrix(std::vector<double>& row, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
}

inline std::vector<std::string> matrix_columns(const std::string& name, Eigen::Index n) {
    if (n == 1) return {name};
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) out.push_back(name + "_" + std::to_string(i) + std::to_string(j));
    return out;
}

inline SolveOptions solve_options(const CommonOptions& c, Eigen::Index n) {
    SolveOptions opt;
    opt.degree = c.degree;
    opt.grid = c.grid;
    const auto strategy = parse_strategy(c.strategy);
    if (!strategy) throw ConfigError("unknown strategy '" + c.strategy + "'");
    opt.drift.strategy = *strategy;
    if (c.a0) opt.drift.a0 = *c.a0 * Eigen::MatrixXd::Identity(n, n);
    if (c.d0) opt.drift.d0 = Eigen::VectorXd::Constant(n, *c.d0);
    return opt;
}

inline std::vector<std::size_t> parse_degrees(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(item, &used);
            if (used != item.size() || v < 0) throw ConfigError("");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("invalid degree '" + item + "' in --sweep");
        }
    }
    if (out.empty()) throw ConfigError("--sweep needs at least one degree");
    return out;
}

/// FD solution of the original equation, Richardson-extrapolated from m and 2m
/// cells (fourth order), sampled on the m-cell grid.
inline SampledPath reference_solution(const Problem& p, std::size_t m) {
    const SampledPath coarse = fd_bvp_solve(p, m);
    const SampledPath fine = fd_bvp_solve(p, 2 * m);
    std::vector<Eigen::VectorXd> v(coarse.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
    return SampledPath(coarse.grid(), std::move(v));
}

inline nlohmann::json timings_json(const std::vector<StageTime>& t) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& s : t) j[s.stage] = s.seconds;
    return j;
}

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
    if (v.size() == 1) return v[0];
    return std::vector<double>(v.data(), v.data() + v.size());
}

inline void flatten(const nlohmann::json& j, const std::string& prefix, std::ostream& os) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, os);
        return;
    }
    os << prefix << ": ";
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s.find('\n') != std::string::npos) {
            os << '\n';
            std::stringstream ss(s);
            std::string line;
            while (std::getline(ss, line)) os << "  " << line << '\n';
            return;
        }
        os << s;
    } else {
        os << j.dump();
    }
    os << '\n';
}

inline void emit_report(const nlohmann::json& report, const std::string& format, std::ostream& err) {
    if (format == "json") {
        err << report.dump(2) << '\n';
    } else {
        flatten(report, "", err);
    }
}

inline nlohmann::json parameters_json(const CommonOptions& c, const PipelineResult& r) {
    return {{"strategy", c.strategy},
            {"method", to_string(r.drift.method())},
            {"degree", c.degree},
            {"grid", c.grid},
            {"quadrature_order", r.mode.quadrature_order},
            {"a0", vector_json(r.drift.A(0).reshaped())},
            {"d0", vector_json(r.drift.D(0))}};
}

}  // namespace detail

inline int cmd_solve(const CommonOptions& c, const std::string& sweep, const std::string& curves, std::ostream& out,
                     std::ostream& err) {
    const Problem problem = load_problem_file(c.config);
    const auto n = static_cast<Eigen::Index>(problem.dimension());
    const SolveOptions opt = detail::solve_options(c, n);
    const PipelineResult r = solve_pipeline(problem, opt);
    const SampledPath reference = detail::reference_solution(problem, c.grid);
    const Grid& grid = r.grid();

    nlohmann::json report;
    report["command"] = "solve";
    report["problem"] = problem.to_config();
    report["parameters"] = detail::parameters_json(c, r);
    // Residuals are recomputed from the emitted drift and mode.
    const DriftResiduals res = drift_residuals(r.drift, *r.weighted);
    report["residuals"]["riccati"] = res.riccati;
    report["residuals"]["d"] = res.d;

    Sink sink(c.out, out);
    CsvWriter csv(sink.stream());
    if (sweep.empty()) {
        std::vector<std::string> head{"t"};
        for (const auto& name : {"y_mode", "y_reference", "abs_error"}) {
            const auto cols = detail::columns(name, n);
            head.insert(head.end(), cols.begin(), cols.end());
        }
        csv.header(head);
        double max_error = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Eigen::VectorXd e = (r.y[i] - reference[i]).cwiseAbs();
            max_error = std::max(max_error, e.maxCoeff());
            std::vector<double> row{grid.node(i)};
            detail::append(row, r.y[i]);
            detail::append(row, reference[i]);
            detail::append(row, e);
            csv.row(row);
        }
        report["residuals"]["el_residual"] = el_residual(r.mode, *r.weighted);
        report["residuals"]["functional"] = r.mode.functional;
        report["residuals"]["max_abs_error"] = max_error;
        report["residuals"]["min_pivot"] = r.mode.min_pivot;
        report["residuals"]["condition"] = r.mode.condition;
        report["timings"] = detail::timings_json(r.timings);
    } else {
        const std::vector<std::size_t> degrees = detail::parse_degrees(sweep);
        csv.header({"degree", "functional", "el_residual", "max_abs_error"});
        std::vector<SampledPath> ys;
        std::vector<double> residuals;
        fkode::detail::Stopwatch clock;
        for (const std::size_t degree : degrees) {
            const ModeSolution mode = minimize(r.drift, r.weighted->terminal_hat(), degree, c.degree == degree ? opt.quad_order : std::nullopt);
            SampledPath y = unweight(mode.samples, *r.weighted);
            double max_error = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) max_error = std::max(max_error, (y[i] - reference[i]).cwiseAbs().maxCoeff());
            const double el = el_residual(mode, *r.weighted);
            residuals.push_back(el);
            csv.row({static_cast<double>(degree), mode.functional, el, max_error});
            ys.push_back(std::move(y));
        }
        bool decreasing = true;
        for (std::size_t k = 1; k < residuals.size(); ++k) decreasing = decreasing && residuals[k] < residuals[k - 1];
        report["sweep"]["degrees"] = degrees;
        report["sweep"]["el_residual_strictly_decreasing"] = decreasing;
        auto timings = r.timings;
        timings.push_back({"sweep", clock.lap()});
        report["timings"] = detail::timings_json(timings);

        if (!curves.empty()) {
            Sink curve_sink(curves, out);
            CsvWriter curve_csv(curve_sink.stream());
            std::vector<std::string> head{"t"};
            for (const std::size_t degree : degrees) {
                const auto cols = detail::columns("y_N" + std::to_string(degree), n);
                head.insert(head.end(), cols.begin(), cols.end());
            }
            const auto ref_cols = detail::columns("y_reference", n);
            head.insert(head.end(), ref_cols.begin(), ref_cols.end());
            curve_csv.header(head);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                std::vector<double> row{grid.node(i)};
                for (const auto& y : ys) detail::append(row, y[i]);
                detail::append(row, reference[i]);
                curve_csv.row(row);
            }
            report["outputs"]["curves"] = curves;
        }
    }
    report["outputs"]["csv"] = sink.path();
    detail::emit_report(report, c.report_format, err);
    return Success;
}

inline int cmd_riccati(const CommonOptions& c, std::ostream& out, std::ostream& err) {
    const Problem problem = load_problem_file(c.config);
    const auto n = static_cast<Eigen::Index>(problem.dimension());
    const SolveOptions opt = detail::solve_options(c, n);
    const Grid grid(problem.horizon(), c.grid);
    fkode::detail::Stopwatch clock;
    const WeightedCoefficients w(problem, grid);
    const DriftPair drift = build_drift(w, opt.drift);
    const double elapsed = clock.lap();

    Sink sink(c.out, out);
    CsvWriter csv(sink.stream());
    std::vector<std::string> head{"t"};
    for (const auto& cols : {detail::matrix_columns("A", n), detail::columns("D", n)}) head.insert(head.end(), cols.begin(), cols.end());
    head.emplace_back("riccati_residual");
    head.emplace_back("d_residual");
    csv.header(head);
    const double h = grid.step();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        const Eigen::MatrixXd& a = drift.A(i);
        const Eigen::MatrixXd a_dot = fkode::detail::sample_derivative(drift.A_samples(), i, h);
        const Eigen::VectorXd d_dot = fkode::detail::sample_derivative(drift.D_samples(), i, h);
        std::vector<double> row{t};
        detail::append_matrix(row, a);
        detail::append(row, drift.D(i));
        row.push_back(fkode::detail::max_abs(a.transpose() * a + a_dot + w.ghat(t)));
        row.push_back(fkode::detail::max_abs(d_dot + a.transpose() * drift.D(i) + w.hhat(t)));
        csv.row(row);
    }

    const DriftResiduals res = drift_residuals(drift, w);
    nlohmann::json report;
    report["command"] = "riccati";
    report["problem"] = problem.to_config();
    report["parameters"] = {{"strategy", c.strategy}, {"method", to_string(drift.method())}, {"grid", c.grid}};
    report["residuals"]["riccati"] = res.riccati;
    report["residuals"]["d"] = res.d;
    report["A_T"] = detail::vector_json(drift.A(grid.intervals()).reshaped());
    report["outputs"]["csv"] = sink.path();
    report["timings"]["build_drift"] = elapsed;
    detail::emit_report(report, c.report_format, err);
    return Success;
}

inline int cmd_compare(const CommonOptions& c, std::ostream& out, std::ostream& err) {
    const Problem problem = load_problem_file(c.config);
    const auto n = static_cast<Eigen::Index>(problem.dimension());
    const PipelineResult r = solve_pipeline(problem, detail::solve_options(c, n));
    const Grid& grid = r.grid();
    fkode::detail::Stopwatch clock;
    const SampledPath discrete = unweight(discrete_mode(r.drift, r.weighted->terminal_hat()), *r.weighted);
    const double t_discrete = clock.lap();
    const SampledPath fd = fd_bvp_solve(problem, c.grid);
    const double t_fd = clock.lap();

    Sink sink(c.out, out);
    CsvWriter csv(sink.stream());
    std::vector<std::string> head{"t"};
    for (const auto& name : {"y_variational", "y_discrete", "y_fd"}) {
        const auto cols = detail::columns(name, n);
        head.insert(head.end(), cols.begin(), cols.end());
    }
    csv.header(head);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{grid.node(i)};
        detail::append(row, r.y[i]);
        detail::append(row, discrete[i]);
        detail::append(row, fd[i]);
        csv.row(row);
    }

    nlohmann::json report;
    report["command"] = "compare";
    report["problem"] = problem.to_config();
    report["parameters"] = detail::parameters_json(c, r);
    report["sup_norm"]["variational_discrete"] = sup_distance(r.y, discrete);
    report["sup_norm"]["variational_fd"] = sup_distance(r.y, fd);
    report["sup_norm"]["discrete_fd"] = sup_distance(discrete, fd);
    report["outputs"]["csv"] = sink.path();
    auto timings = r.timings;
    timings.push_back({"discrete_mode", t_discrete});
    timings.push_back({"fd_oracle", t_fd});
    report["timings"] = detail::timings_json(timings);
    detail::emit_report(report, c.report_format, err);
    return Success;
}

/// Samples X for the weighted problem's drift; the Lagrangian check runs along the mode.
inline int cmd_sample(const CommonOptions& c, std::size_t paths, std::uint64_t seed, std::size_t keep,
                      std::ostream& out, std::ostream& err) {
    if (paths == 0) throw ConfigError("--paths must be positive");
    if (keep > 100) throw ConfigError("--keep is limited to 100 trajectories");
    keep = std::min(keep, paths);
    const Problem problem = load_problem_file(c.config);
    const auto n = static_cast<Eigen::Index>(problem.dimension());
    const PipelineResult r = solve_pipeline(problem, detail::solve_options(c, n));
    const Grid& grid = r.grid();
    fkode::detail::Stopwatch clock;
    const EnsembleStatistics stats = sample_statistics(r.drift, paths, seed, keep);
    const double t_sample = clock.lap();
    const MonteCarloEstimate mc = mc_lagrangian(r.mode.samples, r.drift, paths, seed + 1);
    const double quadrature = lagrangian_quadrature(r.mode.samples, r.drift);
    const double t_mc = clock.lap();

    Sink sink(c.out, out);
    CsvWriter csv(sink.stream());
    std::vector<std::string> head{"t"};
    for (const auto& name : {"mean", "variance"}) {
        const auto cols = detail::columns(name, n);
        head.insert(head.end(), cols.begin(), cols.end());
    }
    for (std::size_t p = 0; p < stats.trajectories.size(); ++p) {
        const auto cols = detail::columns("x" + std::to_string(p), n);
        head.insert(head.end(), cols.begin(), cols.end());
    }
    csv.header(head);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{grid.node(i)};
        detail::append(row, stats.mean[i]);
        detail::append(row, stats.variance[i]);
        for (const auto& x : stats.trajectories) detail::append(row, x[i]);
        csv.row(row);
    }

    nlohmann::json report;
    report["command"] = "sample";
    report["problem"] = problem.to_config();
    report["parameters"] = detail::parameters_json(c, r);
    report["parameters"]["paths"] = paths;
    report["parameters"]["seed"] = seed;
    report["parameters"]["kept"] = stats.trajectories.size();
    report["terminal"]["mean"] = detail::vector_json(stats.mean.back());
    report["terminal"]["variance"] = detail::vector_json(stats.variance.back());
    report["terminal"]["variance_std_error"] = detail::vector_json(stats.terminal_variance_se);
    report["lagrangian"]["monte_carlo"] = mc.estimate;
    report["lagrangian"]["std_error"] = mc.std_error;
    report["lagrangian"]["closed_form"] = quadrature;
    report["lagrangian"]["z_score"] = mc.std_error > 0.0 ? (mc.estimate - quadrature) / mc.std_error : 0.0;
    report["om_value"] = om_value(r.mode.samples, r.drift);
    report["outputs"]["csv"] = sink.path();
    auto timings = r.timings;
    timings.push_back({"sample", t_sample});
    timings.push_back({"mc_lagrangian", t_mc});
    report["timings"] = detail::timings_json(timings);
    detail::emit_report(report, c.report_format, err);
    return Success;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solve linear second-order BVPs as conditional modes of diffusions", "fkode"};
    app.require_subcommand(1);

    CommonOptions common;
    const auto add_common = [&common](CLI::App* sub) {
        sub->add_option("config", common.config, "problem configuration file")->required();
        sub->add_option("--degree", common.degree, "basis degree N")->capture_default_str();
        sub->add_option("--grid", common.grid, "grid intervals m")->capture_default_str()->check(CLI::Range(2, 1 << 24));
        sub->add_option("--strategy", common.strategy, "auto|constant|logderiv|direct")->capture_default_str();
        sub->add_option("--a0", common.a0, "initial value A(0) (times the identity for systems)");
        sub->add_option("--d0", common.d0, "initial value D(0) (every component)");
        sub->add_option("--out", common.out, "CSV destination, - for stdout")->capture_default_str();
        sub->add_option("--report", common.report_format, "report format on stderr: text|json")
            ->capture_default_str()
            ->check(CLI::IsMember({"text", "json"}));
    };

    std::string sweep;
    std::string curves;
    CLI::App* solve = app.add_subcommand("solve", "full pipeline with an FD reference column");
    add_common(solve);
    solve->add_option("--sweep", sweep, "comma-separated degrees; emits a per-degree table");
    solve->add_option("--curves", curves, "with --sweep: also write per-degree curves here");

    CLI::App* riccati = app.add_subcommand("riccati", "drift pair A(t), D(t) and its residuals");
    add_common(riccati);

    CLI::App* compare = app.add_subcommand("compare", "variational vs discrete mode vs FD oracle");
    add_common(compare);

    std::size_t paths = 10000;
    std::uint64_t seed = 42;
    std::size_t keep = 10;
    CLI::App* sample = app.add_subcommand("sample", "sample X paths and check the Monte Carlo Lagrangian");
    add_common(sample);
    sample->add_option("--paths", paths, "number of Brownian paths")->capture_default_str();
    sample->add_option("--seed", seed, "RNG seed")->capture_default_str();
    sample->add_option("--keep", keep, "trajectories written to the CSV (at most 100)")->capture_default_str();

    std::vector<std::string> argv_storage{"fkode"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Success : ConfigFailure;
    }

    try {
        if (solve->parsed()) return cmd_solve(common, sweep, curves, out, err);
        if (riccati->parsed()) return cmd_riccati(common, out, err);
        if (compare->parsed()) return cmd_compare(common, out, err);
        return cmd_sample(common, paths, seed, keep, out, err);
    } catch (const AllMethodsFailed& e) {
        err << "error: " << e.what() << '\n';
        if (e.escape_time() >= 0.0) err << "escape time: " << std::setprecision(17) << e.escape_time() << '\n';
        return SolverFailure;
    } catch (const RiccatiBlowUp& e) {
        err << "error: " << e.what() << '\n' << "escape time: " << std::setprecision(17) << e.escape_time() << '\n';
        return SolverFailure;
    } catch (const SingularSystem& e) {
        err << "error: " << e.what() << '\n';
        return SolverFailure;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const ParseError& e) {
        err << "configuration error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const CommutativityError& e) {
        err << "configuration error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const DomainError& e) {
        err << "configuration error: " << e.what() << '\n';
        return ConfigFailure;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return InternalError;
    }
}

}  // namespace fkode::cli
