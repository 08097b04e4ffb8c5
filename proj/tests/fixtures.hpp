#pragma once

// Shared model fixtures for the unit and acceptance suites.

#include <cstdio>

#include "qbsde/generator.hpp"

namespace qbsde::fixtures {

// g^i = (|y|^2 + sin|z^i|)|z| + |z|^{3/2} + |z^i|^2 with constants chosen so
// the growth/continuity assumptions hold on the default sampling boxes.
inline GeneratorModel remark22_model() {
    GeneratorModel m;
    m.constants.n = 2;
    m.constants.d = 2;
    m.constants.T = 1.0;
    m.constants.gamma = 5.0;
    m.constants.gamma_bar = 1.0;
    m.constants.lambda = 2.5;
    m.constants.delta = 0.5;
    m.constants.C1 = 1.0;
    m.constants.C2 = 2.0;
    m.constants.phi =
        PhiFunction::custom(parse_expr("1000*x + 0.5*x^6", ExprContext::scalar()));
    const auto ctx = ExprContext::generator(2, 2);
    m.components.emplace_back(parse_expr(
        "(norm(y)^2+sin(norm(zrow(1))))*norm(z) + norm(z)^(3/2) + norm(zrow(1))^2", ctx));
    m.components.emplace_back(parse_expr(
        "(norm(y)^2+sin(norm(zrow(2))))*norm(z) + norm(z)^(3/2) + norm(zrow(2))^2", ctx));
    m.alpha = parse_expr("2", ExprContext::alpha(2, 2));
    return m;
}

// g^i = (e^{-y^i} + cos|z^i|)|z| - |z|^{4/3} + (-1)^i |z^i|^2: one component
// strictly quadratic from below, the other from above. Checked on the
// y-box [-2, 2], z-box [-10, 10].
inline GeneratorModel remark26_model() {
    GeneratorModel m;
    m.constants.n = 2;
    m.constants.d = 2;
    m.constants.T = 1.0;
    m.constants.gamma = 4.0;
    m.constants.gamma_bar = 2.0;
    m.constants.lambda = 2.5;
    m.constants.delta = 1.0 / 3.0;
    m.constants.beta = 0.0;
    m.constants.C1 = 2.0;
    m.constants.C2 = 150.0;
    m.constants.phi = PhiFunction::power(2000.0, 1.0);
    const auto ctx = ExprContext::generator(2, 2);
    m.components.emplace_back(parse_expr(
        "(exp(-y1)+cos(norm(zrow(1))))*norm(z) - norm(z)^(4/3) - norm(zrow(1))^2", ctx));
    m.components.emplace_back(parse_expr(
        "(exp(-y2)+cos(norm(zrow(2))))*norm(z) - norm(z)^(4/3) + norm(zrow(2))^2", ctx));
    m.alpha = parse_expr("150", ExprContext::alpha(2, 2));
    return m;
}

inline ValidatorOptions remark26_boxes() {
    ValidatorOptions opt;
    opt.r_y = 2.0;
    opt.r_z = 10.0;
    return opt;
}

// Off-diagonal quadratic counterexample: g^1 = |z^2|^2 outruns every
// lambda |z^2|^{1+delta} budget with delta < 1.
inline GeneratorModel offdiag_counterexample() {
    GeneratorModel m;
    m.constants.n = 2;
    m.constants.d = 2;
    m.constants.T = 1.0;
    m.constants.gamma = 1.0;
    m.constants.gamma_bar = 1.0;
    m.constants.lambda = 1.0;
    m.constants.delta = 0.5;
    const auto ctx = ExprContext::generator(2, 2);
    m.components.emplace_back(parse_expr("norm(zrow(2))^2", ctx));
    m.components.emplace_back(ZeroComponent{});
    m.alpha = parse_expr("1", ExprContext::alpha(2, 2));
    return m;
}

// Pure diagonal quadratic family g^i = sign_i (gamma/2)|z^i|^2.
inline GeneratorModel diag_quad_model(int n, int d, double gamma,
                                      const std::vector<int>& signs) {
    GeneratorModel m;
    m.constants.n = n;
    m.constants.d = d;
    m.constants.gamma = gamma;
    m.constants.gamma_bar = gamma;
    for (int i = 0; i < n; ++i) {
        m.components.emplace_back(DiagQuadComponent{gamma, signs[static_cast<size_t>(i)]});
        m.diagonal.push_back(true);
        m.convexity.push_back(signs[static_cast<size_t>(i)] >= 0 ? ConvexityTag::Convex
                                                                 : ConvexityTag::Concave);
    }
    return m;
}

// Lipschitz-in-y instance with strictly quadratic own-row growth:
// g^i = beta y^i + (gamma/2)|z^i|^2; satisfies the B set with the given beta.
inline GeneratorModel picard_b_model(int n, int d, double beta, double gamma, double T) {
    GeneratorModel m;
    m.constants.n = n;
    m.constants.d = d;
    m.constants.T = T;
    m.constants.beta = beta;
    m.constants.gamma = gamma;
    m.constants.gamma_bar = gamma;
    m.constants.C1 = 1.0;
    const auto ctx = ExprContext::generator(n, d);
    for (int i = 1; i <= n; ++i) {
        char src[96];
        std::snprintf(src, sizeof(src), "%g*y%d + %g*norm(zrow(%d))^2", beta, i,
                      0.5 * gamma, i);
        m.components.emplace_back(parse_expr(src, ctx));
        m.diagonal.push_back(true);
        m.convexity.push_back(ConvexityTag::Convex);
    }
    m.constants.phi = PhiFunction::power(beta, 1.0);
    return m;
}

// Stitching instance: three components g^i = 0.5 y^i + 0.5 |z^i|^2 on T = 1,
// so eps = 1/(2 n beta) = 1/3 and the auto plan has three intervals while the
// per-iteration contraction stays mild (beta T = 0.5).
inline GeneratorModel stitch_model() {
    GeneratorModel m = picard_b_model(3, 1, 0.5, 1.0, 1.0);
    m.constants.C1 = 1.8; // vector-norm bound of the three sin components
    m.constants.phi = PhiFunction::custom(
        parse_expr("0.5*x + 0.5*min(1, 1000*x)", ExprContext::scalar()));
    return m;
}

inline TerminalCondition sin_terminal(int n, int d, bool bounded = true) {
    TerminalCondition tc;
    tc.bounded = bounded;
    for (int i = 0; i < n; ++i)
        tc.h.push_back(parse_expr("sin(b1)", ExprContext::terminal(n, d)));
    return tc;
}

} // namespace qbsde::fixtures
