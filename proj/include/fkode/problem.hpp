#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fkode/coefficient.hpp"
#include "fkode/errors.hpp"
#include "fkode/expression.hpp"

namespace fkode {

/// Linear second-order BVP  y'' + f(t) y' + g(t) y + h(t) = 0,  y(0) = 0, y(T) = a,
/// with y in R^n, f and g n-by-n, h an n-vector.
class Problem {
public:
    Problem(std::size_t n, double horizon, Eigen::VectorXd terminal)
        : n_(n), horizon_(horizon), terminal_(std::move(terminal)), f_(n * n), g_(n * n), h_(n) {
        if (n == 0) throw ConfigError("dimension n must be at least 1");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon T must be positive");
        if (static_cast<std::size_t>(terminal_.size()) != n) {
            throw ConfigError("terminal value a has " + std::to_string(terminal_.size()) + " entries, expected n=" +
                              std::to_string(n));
        }
    }

    /// Scalar problem from expression text.
    static Problem scalar(std::string_view f, std::string_view g, std::string_view h, double horizon, double a) {
        Problem p(1, horizon, Eigen::VectorXd::Constant(1, a));
        p.set_f(0, 0, parse_expression(f));
        p.set_g(0, 0, parse_expression(g));
        p.set_h(0, parse_expression(h));
        return p;
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return n_; }
    [[nodiscard]] bool is_scalar() const noexcept { return n_ == 1; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] const Eigen::VectorXd& terminal() const noexcept { return terminal_; }

    void set_f(std::size_t i, std::size_t j, Coefficient c) { f_.at(index(i, j)) = std::move(c); }
    void set_g(std::size_t i, std::size_t j, Coefficient c) { g_.at(index(i, j)) = std::move(c); }
    void set_h(std::size_t i, Coefficient c) { h_.at(i) = std::move(c); }

    [[nodiscard]] const Coefficient& f_entry(std::size_t i, std::size_t j) const { return f_.at(index(i, j)); }
    [[nodiscard]] const Coefficient& g_entry(std::size_t i, std::size_t j) const { return g_.at(index(i, j)); }
    [[nodiscard]] const Coefficient& h_entry(std::size_t i) const { return h_.at(i); }

    [[nodiscard]] Eigen::MatrixXd f(double t) const { return matrix(f_, t, false); }
    [[nodiscard]] Eigen::MatrixXd f_prime(double t) const { return matrix(f_, t, true); }
    [[nodiscard]] Eigen::MatrixXd g(double t) const { return matrix(g_, t, false); }
    [[nodiscard]] Eigen::VectorXd h(double t) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_; ++i) out[static_cast<Eigen::Index>(i)] = h_[i](t);
        return out;
    }

    [[nodiscard]] bool f_is_zero() const noexcept {
        for (const auto& c : f_) if (!c.is_zero()) return false;
        return true;
    }
    [[nodiscard]] bool f_is_constant() const noexcept {
        for (const auto& c : f_) if (!c.is_constant()) return false;
        return true;
    }
    [[nodiscard]] bool g_is_constant() const noexcept {
        for (const auto& c : g_) if (!c.is_constant()) return false;
        return true;
    }

    /// Evaluate every coefficient at the given points; throws DomainError on failure.
    void check_evaluable(const std::vector<double>& ts) const {
        for (double t : ts) {
            const Eigen::MatrixXd fm = f(t);
            const Eigen::MatrixXd fp = f_prime(t);
            const Eigen::MatrixXd gm = g(t);
            const Eigen::VectorXd hv = h(t);
            if (!fm.allFinite() || !fp.allFinite() || !gm.allFinite() || !hv.allFinite()) {
                throw DomainError("non-finite coefficient value at t=" + std::to_string(t));
            }
        }
    }

    /// Config text that loads back to this problem (tables are referenced by path).
    [[nodiscard]] std::string to_config() const {
        std::ostringstream os;
        os.precision(17);
        os << "n = " << n_ << "\nT = " << horizon_ << "\na = ";
        for (Eigen::Index i = 0; i < terminal_.size(); ++i) os << (i ? ", " : "") << terminal_[i];
        os << '\n';
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                const std::string idx = n_ == 1 ? "" : "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
                os << "f" << idx << " = " << f_[index(i, j)].to_string() << '\n';
                os << "g" << idx << " = " << g_[index(i, j)].to_string() << '\n';
            }
            os << "h" << (n_ == 1 ? "" : "[" + std::to_string(i) + "]") << " = " << h_[i].to_string() << '\n';
        }
        return os.str();
    }

private:
    [[nodiscard]] std::size_t index(std::size_t i, std::size_t j) const {
        if (i >= n_ || j >= n_) throw ConfigError("coefficient index out of range for n=" + std::to_string(n_));
        return i * n_ + j;
    }

    [[nodiscard]] Eigen::MatrixXd matrix(const std::vector<Coefficient>& c, double t, bool derivative) const {
        const auto n = static_cast<Eigen::Index>(n_);
        Eigen::MatrixXd out(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto& e = c[static_cast<std::size_t>(i * n + j)];
                out(i, j) = derivative ? e.derivative(t) : e(t);
            }
        }
        return out;
    }

    std::size_t n_;
    double horizon_;
    Eigen::VectorXd terminal_;
    std::vector<Coefficient> f_;
    std::vector<Coefficient> g_;
    std::vector<Coefficient> h_;
};

/// Parse line-oriented `key = value` config text.
///
/// Keys: `n`, `T`, `a` (comma-separated), `f[i][j]`, `g[i][j]`, `h[i]` with 0-based
/// indices (omitted when n = 1). `n` defaults to 1. `#` starts a comment. Missing
/// coefficients are zero.
/// A coefficient value of the form `@path` loads a two-column "t,value" table;
/// relative paths resolve against `base_dir`.
inline Problem load_problem(const std::string& text, const std::filesystem::path& base_dir = {}) {
    struct Entry {
        std::string value;
        std::size_t line;
    };
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        key.erase(std::remove_if(key.begin(), key.end(), [](char c) { return c == ' ' || c == '\t'; }), key.end());
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
        if (!entries.emplace(key, Entry{value, lineno}).second) {
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }

    const auto number = [](const std::string& key, const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + s + "' is not a number");
        }
    };

    const auto take = [&](const std::string& key) -> std::optional<Entry> {
        const auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        Entry e = it->second;
        entries.erase(it);
        return e;
    };

    const auto n_entry = take("n");
    const double n_value = n_entry ? number("n", n_entry->value) : 1.0;
    if (n_value < 1 || n_value != std::floor(n_value) || n_value > 64) throw ConfigError("n must be a positive integer");
    const auto n = static_cast<std::size_t>(n_value);

    const auto t_entry = take("T");
    if (!t_entry) throw ConfigError("missing key 'T'");
    const double horizon = number("T", t_entry->value);
    if (!(horizon > 0.0)) throw ConfigError("T must be positive, got " + t_entry->value);

    const auto a_entry = take("a");
    if (!a_entry) throw ConfigError("missing key 'a'");
    std::vector<double> a_values;
    {
        std::string item;
        std::istringstream items(a_entry->value);
        while (std::getline(items, item, ',')) a_values.push_back(number("a", trim(item)));
    }
    if (a_values.size() != n) {
        throw ConfigError("dimension mismatch: a has " + std::to_string(a_values.size()) + " entries but n=" +
                          std::to_string(n));
    }
    Problem problem(n, horizon, Eigen::Map<Eigen::VectorXd>(a_values.data(), static_cast<Eigen::Index>(n)));

    const auto coefficient = [&](const std::string& key, const Entry& e) -> Coefficient {
        if (e.value.front() == '@') {
            std::filesystem::path p = e.value.substr(1);
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            return Tabulated::from_csv(p.string());
        }
        try {
            return parse_expression(e.value);
        } catch (const ParseError& err) {
            throw ConfigError("line " + std::to_string(e.line) + ", key '" + key + "': " + err.what());
        }
    };

    static const std::regex matrix_key(R"(([fg])(?:\[(\d+)\]\[(\d+)\])?)");
    static const std::regex vector_key(R"(h(?:\[(\d+)\])?)");
    for (const auto& [key, e] : entries) {
        std::smatch m;
        if (std::regex_match(key, m, matrix_key)) {
            std::size_t i = 0;
            std::size_t j = 0;
            if (m[2].matched) {
                i = std::stoul(m[2]);
                j = std::stoul(m[3]);
            } else if (n != 1) {
                throw ConfigError("key '" + key + "' needs [i][j] indices when n=" + std::to_string(n));
            }
            if (i >= n || j >= n) throw ConfigError("dimension mismatch: key '" + key + "' outside " + std::to_string(n) + "x" + std::to_string(n));
            auto c = coefficient(key, e);
            if (m[1] == "f") problem.set_f(i, j, std::move(c));
            else problem.set_g(i, j, std::move(c));
        } else if (std::regex_match(key, m, vector_key)) {
            std::size_t i = 0;
            if (m[1].matched) i = std::stoul(m[1]);
            else if (n != 1) throw ConfigError("key '" + key + "' needs an [i] index when n=" + std::to_string(n));
            if (i >= n) throw ConfigError("dimension mismatch: key '" + key + "' outside length " + std::to_string(n));
            problem.set_h(i, coefficient(key, e));
        } else {
            throw ConfigError("line " + std::to_string(e.line) + ": unknown key '" + key + "'");
        }
    }

    std::vector<double> probe;
    for (int k = 0; k <= 16; ++k) probe.push_back(horizon * k / 16.0);
    try {
        problem.check_evaluable(probe);
    } catch (const DomainError& err) {
        throw ConfigError(std::string("coefficient not evaluable on [0,T]: ") + err.what());
    }
    return problem;
}

inline Problem load_problem_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_problem(buf.str(), path.parent_path());
}

}  // namespace fkode
