#pragma once

// Coefficient expressions in the single variable t: a small immutable AST with
// a recursive-descent parser, exact symbolic differentiation and a printer
// whose output parses back to the same tree.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>

#include "fkode/errors.hpp"

namespace fkode {

class Expression {
public:
    enum class Op { Constant, Variable, Neg, Sin, Cos, Exp, Sqrt, Log, Add, Sub, Mul, Div, Pow };

    /// The zero expression.
    Expression() : Expression(constant(0.0)) {}

    static Expression constant(double value) {
        return Expression(std::make_shared<const Node>(Node{Op::Constant, value, 0, nullptr, nullptr}));
    }
    static Expression variable() {
        return Expression(std::make_shared<const Node>(Node{Op::Variable, 0.0, 0, nullptr, nullptr}));
    }

    static Expression unary(Op op, const Expression& arg) {
        if (arg.op() == Op::Constant) {
            // Fold when the value is well defined; otherwise keep the node so the
            // domain error surfaces at evaluation time.
            try {
                Expression tmp(std::make_shared<const Node>(Node{op, 0.0, 0, arg.node_, nullptr}));
                return constant(tmp(0.0));
            } catch (const DomainError&) {
            }
        }
        if (op == Op::Neg && arg.op() == Op::Neg) return Expression(arg.node_->lhs);
        return Expression(std::make_shared<const Node>(Node{op, 0.0, 0, arg.node_, nullptr}));
    }

    static Expression binary(Op op, const Expression& lhs, const Expression& rhs) {
        const bool lc = lhs.op() == Op::Constant;
        const bool rc = rhs.op() == Op::Constant;
        const double lv = lc ? lhs.node_->value : 0.0;
        const double rv = rc ? rhs.node_->value : 0.0;
        switch (op) {
            case Op::Add:
                if (lc && rc) return constant(lv + rv);
                if (lc && lv == 0.0) return rhs;
                if (rc && rv == 0.0) return lhs;
                break;
            case Op::Sub:
                if (lc && rc) return constant(lv - rv);
                if (rc && rv == 0.0) return lhs;
                if (lc && lv == 0.0) return unary(Op::Neg, rhs);
                break;
            case Op::Mul:
                if (lc && rc) return constant(lv * rv);
                if ((lc && lv == 0.0) || (rc && rv == 0.0)) return constant(0.0);
                if (lc && lv == 1.0) return rhs;
                if (rc && rv == 1.0) return lhs;
                break;
            case Op::Div:
                if (lc && rc && rv != 0.0) return constant(lv / rv);
                if (lc && lv == 0.0 && !(rc && rv == 0.0)) return constant(0.0);
                if (rc && rv == 1.0) return lhs;
                break;
            default:
                break;
        }
        return Expression(std::make_shared<const Node>(Node{op, 0.0, 0, lhs.node_, rhs.node_}));
    }

    static Expression power(const Expression& base, int exponent) {
        if (exponent == 0) return constant(1.0);
        if (exponent == 1) return base;
        if (base.op() == Op::Constant && !(base.node_->value == 0.0 && exponent < 0)) {
            return constant(std::pow(base.node_->value, exponent));
        }
        return Expression(std::make_shared<const Node>(Node{Op::Pow, 0.0, exponent, base.node_, nullptr}));
    }

    [[nodiscard]] Op op() const noexcept { return node_->op; }

    /// Value of a Constant node; 0 for anything else.
    [[nodiscard]] double constant_value() const noexcept { return node_->op == Op::Constant ? node_->value : 0.0; }

    /// True when the tree contains no occurrence of t.
    [[nodiscard]] bool is_constant() const noexcept { return !depends_on_t(*node_); }

    /// Evaluate at t. Throws DomainError for sqrt/log of invalid arguments and division by zero.
    [[nodiscard]] double operator()(double t) const { return eval(*node_, t); }

    [[nodiscard]] Expression derivative() const { return derive(node_); }

    /// Fully parenthesized text that parses back to an equivalent tree.
    [[nodiscard]] std::string to_string() const {
        std::string out;
        print(*node_, out);
        return out;
    }

    friend Expression operator+(const Expression& a, const Expression& b) { return binary(Op::Add, a, b); }
    friend Expression operator-(const Expression& a, const Expression& b) { return binary(Op::Sub, a, b); }
    friend Expression operator*(const Expression& a, const Expression& b) { return binary(Op::Mul, a, b); }
    friend Expression operator/(const Expression& a, const Expression& b) { return binary(Op::Div, a, b); }
    friend Expression operator-(const Expression& a) { return unary(Op::Neg, a); }

private:
    struct Node {
        Op op;
        double value;
        int exponent;
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };
    using NodePtr = std::shared_ptr<const Node>;

    explicit Expression(NodePtr node) : node_(std::move(node)) {}

    static bool depends_on_t(const Node& n) noexcept {
        if (n.op == Op::Variable) return true;
        if (n.lhs && depends_on_t(*n.lhs)) return true;
        return n.rhs && depends_on_t(*n.rhs);
    }

    static double eval(const Node& n, double t) {
        switch (n.op) {
            case Op::Constant: return n.value;
            case Op::Variable: return t;
            case Op::Neg: return -eval(*n.lhs, t);
            case Op::Sin: return std::sin(eval(*n.lhs, t));
            case Op::Cos: return std::cos(eval(*n.lhs, t));
            case Op::Exp: return std::exp(eval(*n.lhs, t));
            case Op::Sqrt: {
                const double x = eval(*n.lhs, t);
                if (x < 0.0) throw DomainError("sqrt of negative value " + std::to_string(x) + " at t=" + std::to_string(t));
                return std::sqrt(x);
            }
            case Op::Log: {
                const double x = eval(*n.lhs, t);
                if (!(x > 0.0)) throw DomainError("log of non-positive value " + std::to_string(x) + " at t=" + std::to_string(t));
                return std::log(x);
            }
            case Op::Add: return eval(*n.lhs, t) + eval(*n.rhs, t);
            case Op::Sub: return eval(*n.lhs, t) - eval(*n.rhs, t);
            case Op::Mul: return eval(*n.lhs, t) * eval(*n.rhs, t);
            case Op::Div: {
                const double den = eval(*n.rhs, t);
                if (den == 0.0) throw DomainError("division by zero at t=" + std::to_string(t));
                return eval(*n.lhs, t) / den;
            }
            case Op::Pow: {
                const double x = eval(*n.lhs, t);
                if (x == 0.0 && n.exponent < 0) throw DomainError("zero raised to a negative power at t=" + std::to_string(t));
                return std::pow(x, n.exponent);
            }
        }
        return 0.0;
    }

    static Expression derive(const NodePtr& p) {
        const Node& n = *p;
        const auto u = [&] { return Expression(n.lhs); };
        const auto v = [&] { return Expression(n.rhs); };
        switch (n.op) {
            case Op::Constant: return constant(0.0);
            case Op::Variable: return constant(1.0);
            case Op::Neg: return -derive(n.lhs);
            case Op::Sin: return unary(Op::Cos, u()) * derive(n.lhs);
            case Op::Cos: return -(unary(Op::Sin, u()) * derive(n.lhs));
            case Op::Exp: return Expression(p) * derive(n.lhs);
            case Op::Sqrt: return derive(n.lhs) / (constant(2.0) * Expression(p));
            case Op::Log: return derive(n.lhs) / u();
            case Op::Add: return derive(n.lhs) + derive(n.rhs);
            case Op::Sub: return derive(n.lhs) - derive(n.rhs);
            case Op::Mul: return derive(n.lhs) * v() + u() * derive(n.rhs);
            case Op::Div: return (derive(n.lhs) * v() - u() * derive(n.rhs)) / power(v(), 2);
            case Op::Pow:
                return constant(static_cast<double>(n.exponent)) * power(u(), n.exponent - 1) * derive(n.lhs);
        }
        return constant(0.0);
    }

    static void print(const Node& n, std::string& out) {
        switch (n.op) {
            case Op::Constant: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", n.value);
                if (n.value < 0.0 || std::signbit(n.value)) {
                    out += '(';
                    out += buf;
                    out += ')';
                } else {
                    out += buf;
                }
                return;
            }
            case Op::Variable: out += 't'; return;
            case Op::Neg:
                out += "(-";
                print(*n.lhs, out);
                out += ')';
                return;
            case Op::Sin: case Op::Cos: case Op::Exp: case Op::Sqrt: case Op::Log:
                out += function_name(n.op);
                out += '(';
                print(*n.lhs, out);
                out += ')';
                return;
            case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: {
                static constexpr std::string_view symbols = "+-*/";
                out += '(';
                print(*n.lhs, out);
                out += ' ';
                out += symbols[static_cast<int>(n.op) - static_cast<int>(Op::Add)];
                out += ' ';
                print(*n.rhs, out);
                out += ')';
                return;
            }
            case Op::Pow:
                out += '(';
                print(*n.lhs, out);
                out += "^(" + std::to_string(n.exponent) + "))";
                return;
        }
    }

    static std::string_view function_name(Op op) noexcept {
        switch (op) {
            case Op::Sin: return "sin";
            case Op::Cos: return "cos";
            case Op::Exp: return "exp";
            case Op::Sqrt: return "sqrt";
            case Op::Log: return "log";
            default: return "";
        }
    }

    NodePtr node_;
};

inline Expression differentiate(const Expression& e) { return e.derivative(); }

namespace detail {

// Grammar (loosest to tightest):
//   expr  := term (('+'|'-') term)*
//   term  := unary (('*'|'/') unary)*
//   unary := ('-'|'+') unary | power
//   power := primary ('^' unary)?        exponent must fold to an integer constant
//   primary := number | 't' | 'pi' | func '(' expr ')' | '(' expr ')'
class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view text) : text_(text) {}

    Expression parse() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
        Expression e = parse_expr();
        skip_space();
        if (pos_ != text_.size()) throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    using Op = Expression::Op;

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    Expression parse_expr() {
        Expression lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = Expression::binary(Op::Add, lhs, parse_term());
            else if (accept('-')) lhs = Expression::binary(Op::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    Expression parse_term() {
        Expression lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = Expression::binary(Op::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = Expression::binary(Op::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    Expression parse_unary() {
        if (accept('-')) return Expression::unary(Op::Neg, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    Expression parse_power() {
        Expression base = parse_primary();
        skip_space();
        if (!accept('^')) return base;
        const std::size_t at = pos_;
        const Expression exponent = parse_unary();
        if (!exponent.is_constant()) throw ParseError("exponent must be a constant integer", at);
        const double value = exponent(0.0);
        if (value != std::nearbyint(value) || std::abs(value) > 1024.0) {
            throw ParseError("exponent must be a constant integer", at);
        }
        return Expression::power(base, static_cast<int>(value));
    }

    Expression parse_primary() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError("unexpected end of expression", pos_);
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expression inner = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            const std::string_view name = text_.substr(start, pos_ - start);
            if (name == "t") return Expression::variable();
            if (name == "pi") return Expression::constant(std::numbers::pi);
            Op op;
            if (name == "sin") op = Op::Sin;
            else if (name == "cos") op = Op::Cos;
            else if (name == "exp") op = Op::Exp;
            else if (name == "sqrt") op = Op::Sqrt;
            else if (name == "log") op = Op::Log;
            else throw ParseError("unknown identifier '" + std::string(name) + "'", start);
            if (!accept('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
            Expression arg = parse_expr();
            if (!accept(')')) throw ParseError("expected ')'", pos_);
            return Expression::unary(op, arg);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expression parse_number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            }
        }
        double value = 0.0;
        const char* first = text_.data() + start;
        const char* last = text_.data() + pos_;
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last) throw ParseError("malformed number", start);
        return Expression::constant(value);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Parse an arithmetic expression in t. Precedence: ^ > unary minus > * / > + -.
inline Expression parse_expression(std::string_view text) { return detail::ExpressionParser(text).parse(); }

}  // namespace fkode
