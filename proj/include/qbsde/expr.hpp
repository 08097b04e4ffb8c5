#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qbsde/errors.hpp"

namespace qbsde {

// Where an expression is allowed to look for its inputs. Generator
// components see (t, y, z); terminal functions see the Brownian endpoint b;
// alpha sees (t, b); growth moduli are functions of a single variable x.
// Declared named constants are visible everywhere.
struct ExprContext {
    int n = 0;
    int d = 0;
    bool allow_t = false;
    bool allow_y = false; // y1..yn, norm(y)
    bool allow_z = false; // z[i][j], norm(z), norm(zrow(i))
    bool allow_b = false; // b1..bd
    bool allow_x = false; // single scalar argument named x
    std::map<std::string, double> params;

    static ExprContext generator(int n, int d, std::map<std::string, double> params = {}) {
        return ExprContext{n, d, true, true, true, false, false, std::move(params)};
    }
    static ExprContext terminal(int n, int d, std::map<std::string, double> params = {}) {
        return ExprContext{n, d, false, false, false, true, false, std::move(params)};
    }
    static ExprContext alpha(int n, int d, std::map<std::string, double> params = {}) {
        return ExprContext{n, d, true, false, false, true, false, std::move(params)};
    }
    static ExprContext scalar(std::map<std::string, double> params = {}) {
        return ExprContext{0, 0, false, false, false, false, true, std::move(params)};
    }
};

// Values for the free variables of one evaluation. Spans may be empty when
// the context does not allow the corresponding variable class.
struct EvalEnv {
    double t = 0.0;
    std::span<const double> y{}; // length n
    std::span<const double> z{}; // row-major n*d
    std::span<const double> b{}; // length d
    double x = 0.0;
};

class ExprParseError : public std::runtime_error {
public:
    ExprParseError(const std::string& msg, std::size_t position)
        : std::runtime_error(msg + " (at offset " + std::to_string(position) + ")"),
          position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

// Domain failure during evaluation; carries the offending subexpression.
class ExprEvalError : public std::runtime_error {
public:
    ExprEvalError(const std::string& msg, std::string subexpr)
        : std::runtime_error(msg + " in subexpression `" + subexpr + "`"),
          subexpr_(std::move(subexpr)) {}
    const std::string& subexpression() const { return subexpr_; }

private:
    std::string subexpr_;
};

enum class UnaryOp : std::uint8_t { Neg, Abs, Sgn, Sin, Cos, Exp, Ln, Sqrt };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow, Min, Max };

// Immutable arithmetic expression tree. Values are immutable after parse;
// evaluation is pure and reentrant.
class Expr {
public:
    enum class Kind : std::uint8_t {
        Literal,  // value
        VarT,
        VarY,     // index i (1-based)
        VarZ,     // indices (i, j) (1-based)
        VarB,     // index j (1-based)
        VarX,
        Param,    // named constant; value baked at parse time
        NormY,    // |y|
        NormZ,    // Frobenius |z|
        NormZRow, // |z^i|
        Unary,    // child a
        Binary,   // children a, b
    };

    struct Node {
        Kind kind;
        UnaryOp uop{};
        BinaryOp bop{};
        double value = 0.0;
        int a = -1;
        int b = -1;
        int i = 0;
        int j = 0;
        std::uint32_t pos = 0;
        std::string name; // Param only
    };

    double evaluate(const EvalEnv& env) const;
    std::string pretty() const { return pretty(root_); }
    const ExprContext& context() const { return ctx_; }
    const std::string& source() const { return source_; }

    static bool structurally_equal(const Expr& a, const Expr& b);

    // Exposed for the parser and tests.
    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }

private:
    friend class ExprParser;
    double eval_node(int id, const EvalEnv& env) const;
    std::string pretty(int id) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    ExprContext ctx_;
    std::string source_;
};

// Parses standard infix arithmetic with precedence pow > unary minus >
// (*,/) > (+,-), parentheses, function calls, and the norm intrinsics.
// sgn follows the convention sgn(0) = -1.
Expr parse_expr(const std::string& source, const ExprContext& ctx);

} // namespace qbsde
