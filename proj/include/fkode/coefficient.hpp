#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fkode/errors.hpp"
#include "fkode/expression.hpp"

namespace fkode {

/// Coefficient given as samples (t_i, v_i). Interpolated by piecewise-cubic
/// Hermite with central-difference node slopes; the derivative is that of the
/// interpolant.
class Tabulated {
public:
    Tabulated(std::vector<double> t, std::vector<double> v, std::string source = {})
        : t_(std::move(t)), v_(std::move(v)), source_(std::move(source)) {
        if (t_.size() != v_.size()) throw ConfigError("tabulated coefficient: column length mismatch");
        if (t_.size() < 2) throw ConfigError("tabulated coefficient needs at least 2 samples");
        for (std::size_t i = 1; i < t_.size(); ++i) {
            if (!(t_[i] > t_[i - 1])) throw ConfigError("tabulated coefficient: abscissae must be strictly increasing");
        }
        slope_.resize(t_.size());
        const std::size_t last = t_.size() - 1;
        slope_[0] = (v_[1] - v_[0]) / (t_[1] - t_[0]);
        slope_[last] = (v_[last] - v_[last - 1]) / (t_[last] - t_[last - 1]);
        for (std::size_t i = 1; i < last; ++i) slope_[i] = (v_[i + 1] - v_[i - 1]) / (t_[i + 1] - t_[i - 1]);
    }

    /// Read "t,value" rows (optional header, '#' comments).
    static Tabulated from_csv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open tabulated coefficient file '" + path + "'");
        std::vector<double> t;
        std::vector<double> v;
        std::string line;
        while (std::getline(in, line)) {
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream row(line);
            double a = 0.0;
            double b = 0.0;
            if (!(row >> a >> b)) {
                if (t.empty()) continue;  // header
                throw ConfigError("malformed row in '" + path + "': " + line);
            }
            t.push_back(a);
            v.push_back(b);
        }
        return Tabulated(std::move(t), std::move(v), path);
    }

    [[nodiscard]] double front() const noexcept { return t_.front(); }
    [[nodiscard]] double back() const noexcept { return t_.back(); }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

    [[nodiscard]] double operator()(double t) const {
        const auto [i, s, h] = locate(t);
        const double s2 = s * s;
        const double s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * v_[i] + (s3 - 2 * s2 + s) * h * slope_[i] +
               (-2 * s3 + 3 * s2) * v_[i + 1] + (s3 - s2) * h * slope_[i + 1];
    }

    [[nodiscard]] double derivative(double t) const {
        const auto [i, s, h] = locate(t);
        const double s2 = s * s;
        return ((6 * s2 - 6 * s) * v_[i] + (-6 * s2 + 6 * s) * v_[i + 1]) / h +
               (3 * s2 - 4 * s + 1) * slope_[i] + (3 * s2 - 2 * s) * slope_[i + 1];
    }

private:
    struct Where {
        std::size_t index;
        double s;
        double h;
    };

    [[nodiscard]] Where locate(double t) const {
        if (t < t_.front() - 1e-12 || t > t_.back() + 1e-12) {
            throw DomainError("t=" + std::to_string(t) + " outside tabulated range of '" + source_ + "'");
        }
        auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
        i = std::min(i, t_.size() - 2);
        const double h = t_[i + 1] - t_[i];
        return {i, std::clamp((t - t_[i]) / h, 0.0, 1.0), h};
    }

    std::vector<double> t_;
    std::vector<double> v_;
    std::vector<double> slope_;
    std::string source_;
};

/// A scalar coefficient function of t: symbolic or tabulated.
class Coefficient {
public:
    Coefficient() = default;
    Coefficient(Expression e) : fn_(std::move(e)), dfn_(std::get<Expression>(fn_).derivative()) {}  // NOLINT
    Coefficient(Tabulated tab) : fn_(std::move(tab)) {}                                              // NOLINT

    [[nodiscard]] double operator()(double t) const {
        return std::visit([t](const auto& f) { return f(t); }, fn_);
    }

    /// Exact for expressions; derivative of the Hermite interpolant for tables.
    [[nodiscard]] double derivative(double t) const {
        if (const auto* tab = std::get_if<Tabulated>(&fn_)) return tab->derivative(t);
        return dfn_(t);
    }

    [[nodiscard]] bool is_expression() const noexcept { return std::holds_alternative<Expression>(fn_); }
    [[nodiscard]] const Expression* expression() const noexcept { return std::get_if<Expression>(&fn_); }

    [[nodiscard]] bool is_constant() const noexcept {
        const auto* e = expression();
        return e != nullptr && e->is_constant();
    }

    [[nodiscard]] bool is_zero() const noexcept {
        const auto* e = expression();
        return e != nullptr && e->op() == Expression::Op::Constant && e->constant_value() == 0.0;
    }

    [[nodiscard]] std::string to_string() const {
        if (const auto* tab = std::get_if<Tabulated>(&fn_)) return "@" + tab->source();
        return std::get<Expression>(fn_).to_string();
    }

private:
    std::variant<Expression, Tabulated> fn_;
    Expression dfn_;
};

}  // namespace fkode
