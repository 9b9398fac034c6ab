#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fkode {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is the 0-based character offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Evaluation outside the domain of an operation (sqrt/log of a negative, x/0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid problem configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Operands live on different grids or have mismatched shapes.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Weighted transform precondition (e^{-V} commuting with f and g) failed.
class CommutativityError : public Error {
public:
    CommutativityError(const std::string& what, double defect)
        : Error(what), defect_(defect) {}

    [[nodiscard]] double defect() const noexcept { return defect_; }

private:
    double defect_;
};

/// Finite-time escape of a Riccati solution (or a zero of the linearized z).
class RiccatiBlowUp : public Error {
public:
    RiccatiBlowUp(const std::string& what, double escape_time)
        : Error(what + " (escape at t=" + std::to_string(escape_time) + ")"),
          escape_time_(escape_time) {}

    [[nodiscard]] double escape_time() const noexcept { return escape_time_; }

private:
    double escape_time_;
};

/// Every drift construction method failed; carries the per-method diagnostics.
class AllMethodsFailed : public Error {
public:
    struct Attempt {
        std::string method;
        std::string message;
        /// Escape time when the failure was a blow-up, negative otherwise.
        double escape_time = -1.0;
    };

    explicit AllMethodsFailed(std::vector<Attempt> attempts)
        : Error(summarize(attempts)), attempts_(std::move(attempts)) {}

    [[nodiscard]] const std::vector<Attempt>& attempts() const noexcept { return attempts_; }

    /// Earliest escape time reported by any method, or negative if none blew up.
    [[nodiscard]] double escape_time() const noexcept {
        double best = -1.0;
        for (const auto& a : attempts_) {
            if (a.escape_time >= 0.0 && (best < 0.0 || a.escape_time < best)) best = a.escape_time;
        }
        return best;
    }

private:
    static std::string summarize(const std::vector<Attempt>& attempts) {
        std::string s = "all drift construction methods failed";
        for (const auto& a : attempts) s += "; " + a.method + ": " + a.message;
        return s;
    }

    std::vector<Attempt> attempts_;
};

/// Singular (or numerically singular) linear system. `pivot` is the failing row/block.
class SingularSystem : public Error {
public:
    SingularSystem(const std::string& what, std::size_t pivot)
        : Error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}

    [[nodiscard]] std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

}  // namespace fkode
