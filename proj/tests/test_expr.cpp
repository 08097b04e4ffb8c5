#include "doctest.h"

#include <cmath>
#include <cstring>
#include <vector>

#include "qbsde/expr.hpp"
#include "qbsde/rng.hpp"

using namespace qbsde;

namespace {

Expr gen_parse(const std::string& s, int n, int d) {
    return parse_expr(s, ExprContext::generator(n, d));
}

// Random well-formed expression source, used by the round-trip property.
struct ExprGen {
    RandomStream rng;
    ExprContext ctx;

    std::string atom() {
        switch (rng.bits() % 6) {
            case 0: return "t";
            case 1: return "y" + std::to_string(1 + rng.bits() % ctx.n);
            case 2: {
                auto i = 1 + rng.bits() % ctx.n;
                auto j = 1 + rng.bits() % ctx.d;
                return "z[" + std::to_string(i) + "][" + std::to_string(j) + "]";
            }
            case 3: return "norm(zrow(" + std::to_string(1 + rng.bits() % ctx.n) + "))";
            case 4: return rng.bits() % 2 ? "norm(y)" : "norm(z)";
            default: {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f", rng.uniform(0.0, 10.0));
                return buf;
            }
        }
    }

    std::string expr(int depth) {
        if (depth <= 0) return atom();
        switch (rng.bits() % 8) {
            case 0: return expr(depth - 1) + " + " + expr(depth - 1);
            case 1: return expr(depth - 1) + " - " + expr(depth - 1);
            case 2: return expr(depth - 1) + "*" + expr(depth - 1);
            case 3: return "(" + expr(depth - 1) + ")/(" + expr(depth - 1) + " + 11)";
            case 4: return "-" + atom();
            case 5: {
                const char* fn[] = {"abs", "sgn", "sin", "cos", "exp", "sqrt"};
                return std::string(fn[rng.bits() % 6]) + "(abs(" + expr(depth - 1) + "))";
            }
            case 6: return "min(" + expr(depth - 1) + ", " + expr(depth - 1) + ")";
            default: return atom() + "^2";
        }
    }
};

} // namespace

TEST_CASE("parse: constant and simple productions") {
    Expr zero = gen_parse("0", 1, 1);
    CHECK(zero.nodes().size() == 1);
    CHECK(zero.evaluate({}) == 0.0);

    Expr q = gen_parse("0.5*norm(zrow(1))^2", 2, 3);
    std::vector<double> y(2, 0.0);
    std::vector<double> z = {1, 2, 2, 0, 0, 0}; // z^1 = (1,2,2), z^2 = 0
    EvalEnv env{0.0, y, z, {}, 0.0};
    CHECK(q.evaluate(env) == doctest::Approx(4.5).epsilon(1e-14));
}

TEST_CASE("parse: generator of the mixed convex/concave example family") {
    // i = 1 component; n = d = 2.
    Expr e = gen_parse(
        "(exp(-y1)+cos(norm(zrow(1))))*norm(z) - norm(z)^(4/3) - norm(zrow(1))^2", 2, 2);
    std::vector<double> y = {0.0, 0.0};
    std::vector<double> z = {1, 0, 0, 0};
    const double v = e.evaluate({0.0, y, z, {}, 0.0});
    // (1 + cos 1)*1 - 1 - 1
    CHECK(v == doctest::Approx(std::cos(1.0) - 1.0).epsilon(1e-14));
}

TEST_CASE("evaluate: sgn convention sgn(0) = -1") {
    Expr e = gen_parse("sgn(y1)", 1, 1);
    std::vector<double> y = {0.0};
    CHECK(e.evaluate({0.0, y, {}, {}, 0.0}) == -1.0);
    y[0] = 1e-300;
    CHECK(e.evaluate({0.0, y, {}, {}, 0.0}) == 1.0);
    y[0] = -2.0;
    CHECK(e.evaluate({0.0, y, {}, {}, 0.0}) == -1.0);
}

TEST_CASE("evaluate: norms") {
    Expr e = gen_parse("norm(z)", 1, 2);
    std::vector<double> z = {3, 4};
    CHECK(e.evaluate({0.0, {}, z, {}, 0.0}) == doctest::Approx(5.0).epsilon(1e-15));

    Expr r = gen_parse("0.5*norm(zrow(1))^2", 2, 2);
    std::vector<double> y(2, 0.0);
    std::vector<double> zz = {1, 2, 9, 9};
    CHECK(r.evaluate({0.0, y, zz, {}, 0.0}) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("parse errors carry positions and name the problem") {
    CHECK_THROWS_AS(gen_parse("", 1, 1), ExprParseError);
    CHECK_THROWS_AS(gen_parse("1 + ", 1, 1), ExprParseError);
    CHECK_THROWS_AS(gen_parse("foo + 1", 1, 1), ExprParseError);       // unknown identifier
    CHECK_THROWS_AS(gen_parse("sin(1, 2)", 1, 1), ExprParseError);     // arity
    CHECK_THROWS_AS(gen_parse("min(1)", 1, 1), ExprParseError);        // arity
    CHECK_THROWS_AS(gen_parse("norm(zrow(3))", 2, 2), ExprParseError); // range
    CHECK_THROWS_AS(gen_parse("z[1][5]", 2, 2), ExprParseError);       // range
    CHECK_THROWS_AS(gen_parse("y3", 2, 2), ExprParseError);            // range

    try {
        gen_parse("1 + bogus", 1, 1);
        FAIL("expected parse error");
    } catch (const ExprParseError& err) {
        CHECK(err.position() == 4);
    }

    // Context restrictions: terminal expressions cannot reference y or z.
    CHECK_THROWS_AS(parse_expr("y1", ExprContext::terminal(2, 2)), ExprParseError);
    CHECK_NOTHROW(parse_expr("sin(b1) + b2", ExprContext::terminal(2, 2)));
}

TEST_CASE("evaluate: domain errors name the offending subexpression") {
    Expr e = gen_parse("1 + ln(y1)", 1, 1);
    std::vector<double> y = {-1.0};
    try {
        e.evaluate({0.0, y, {}, {}, 0.0});
        FAIL("expected eval error");
    } catch (const ExprEvalError& err) {
        CHECK(err.subexpression() == "ln(y1)");
    }

    Expr div = gen_parse("1/y1", 1, 1);
    y[0] = 0.0;
    CHECK_THROWS_AS(div.evaluate({0.0, y, {}, {}, 0.0}), ExprEvalError);

    Expr p = gen_parse("0^(-1)", 1, 1);
    CHECK_THROWS_AS(p.evaluate({}), ExprEvalError);
}

TEST_CASE("precedence: pow binds tighter than unary minus, mul over add") {
    Expr e = gen_parse("-y1^2", 1, 1);
    std::vector<double> y = {3.0};
    CHECK(e.evaluate({0.0, y, {}, {}, 0.0}) == -9.0);

    RandomStream rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10),
                     c = rng.uniform(-10, 10);
        char src[128];
        std::snprintf(src, sizeof(src), "%.17g + %.17g*%.17g", a, b, c);
        Expr e2 = gen_parse(src, 1, 1);
        CHECK(e2.evaluate({}) == a + b * c);
    }
}

TEST_CASE("round trip: pretty-print reparses to a structurally identical tree") {
    ExprGen g{RandomStream(99), ExprContext::generator(3, 2)};
    for (int trial = 0; trial < 400; ++trial) {
        const std::string src = g.expr(3);
        Expr e1 = parse_expr(src, g.ctx);
        Expr e2 = parse_expr(e1.pretty(), g.ctx);
        CAPTURE(src);
        CAPTURE(e1.pretty());
        CHECK(Expr::structurally_equal(e1, e2));
    }
}

TEST_CASE("evaluation is deterministic: identical env gives identical bits") {
    ExprGen g{RandomStream(7), ExprContext::generator(2, 2)};
    std::vector<double> y = {0.3, -1.2};
    std::vector<double> z = {0.5, -0.25, 2.0, 1.5};
    EvalEnv env{0.7, y, z, {}, 0.0};
    for (int trial = 0; trial < 100; ++trial) {
        Expr e = parse_expr(g.expr(3), g.ctx);
        const double v1 = e.evaluate(env);
        const double v2 = e.evaluate(env);
        CHECK(std::memcmp(&v1, &v2, sizeof(double)) == 0);
    }
}

TEST_CASE("declared constants resolve at parse time and print by name") {
    ExprContext ctx = ExprContext::generator(1, 1, {{"kappa", 2.5}});
    Expr e = parse_expr("kappa*y1", ctx);
    std::vector<double> y = {2.0};
    CHECK(e.evaluate({0.0, y, {}, {}, 0.0}) == 5.0);
    CHECK(e.pretty() == "kappa*y1");
}
