#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "qbsde/oracle.hpp"
#include "qbsde/picard.hpp"

using namespace qbsde;

namespace {

constexpr std::uint64_t kSeed = 20260811;

std::vector<double> terminal_field(const PathEnsemble& e, const TerminalCondition& tc,
                                   std::size_t n) {
    std::vector<double> out(e.paths() * n);
    std::vector<double> xi(n);
    for (std::size_t m = 0; m < e.paths(); ++m) {
        tc.evaluate(e.state(m, e.grid().N), xi);
        for (std::size_t i = 0; i < n; ++i) out[m * n + i] = xi[i];
    }
    return out;
}

double y0_mean(const YField& Y, std::size_t i) {
    double acc = 0.0;
    for (std::size_t m = 0; m < Y.M; ++m) acc += Y.at(m, Y.k_lo)[i];
    return acc / static_cast<double>(Y.M);
}

} // namespace

TEST_CASE("zero generator: fixed point reached after one step, dY2 = 0") {
    GeneratorModel m;
    m.constants.n = 2;
    m.constants.d = 1;
    m.components.assign(2, ZeroComponent{});
    m.diagonal.assign(2, true);

    const PathEnsemble e = simulate(kSeed, 4000, 10, 1.0, 1);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 1), 2);
    PicardOptions opts;
    const PicardResult r = picard_iterate(m, terminal, e, 0, 10, opts);
    CHECK(r.trace.converged);
    REQUIRE(r.trace.records.size() == 2);
    CHECK(r.trace.records[0].dY > 0.0);
    CHECK(r.trace.records[1].dY == 0.0);
}

TEST_CASE("every iterate keeps the terminal exactly") {
    const GeneratorModel m = fixtures::picard_b_model(2, 1, 0.5, 1.0, 0.8);
    const PathEnsemble e = simulate_antithetic(kSeed, 2000, 16, 0.8, 1);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 1), 2);
    PicardOptions opts;
    opts.observer = [&](int, const YField& Y, const ZField&) {
        for (std::size_t pm = 0; pm < Y.M; ++pm)
            for (std::size_t i = 0; i < 2; ++i)
                CHECK(Y.at(pm, 16)[i] == terminal[pm * 2 + i]);
    };
    (void)picard_iterate(m, terminal, e, 0, 16, opts);
}

TEST_CASE("decoupled map ignores the frozen V field for diagonal models") {
    const GeneratorModel m = fixtures::diag_quad_model(2, 2, 1.0, {+1, -1});
    const PathEnsemble e = simulate(kSeed, 1000, 8, 1.0, 2);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 2), 2);

    const YField U = YField::zeros(1000, 2, 0, 8);
    ZField V1 = ZField::zeros(1000, 2, 2, 0, 8);
    ZField V2 = ZField::zeros(1000, 2, 2, 0, 8);
    for (auto& v : V2.v) v = 42.0;

    SolverOptions sopts;
    const BsdeSolution a = gamma_map(m, U, V1, terminal, e, 0, 8, sopts, false);
    const BsdeSolution b = gamma_map(m, U, V2, terminal, e, 0, 8, sopts, false);
    CHECK(a.Y.v == b.Y.v);
    CHECK(a.Z.v == b.Z.v);
}

TEST_CASE("components are decoupled: swapping definitions swaps results exactly") {
    const PathEnsemble e = simulate(kSeed, 1500, 8, 1.0, 1);
    GeneratorModel ab = fixtures::diag_quad_model(2, 1, 1.0, {+1, -1});
    GeneratorModel ba = fixtures::diag_quad_model(2, 1, 1.0, {-1, +1});

    const auto ctxT = ExprContext::terminal(2, 1);
    TerminalCondition tab;
    tab.h.push_back(parse_expr("sin(b1)", ctxT));
    tab.h.push_back(parse_expr("cos(b1)", ctxT));
    TerminalCondition tba;
    tba.h.push_back(parse_expr("cos(b1)", ctxT));
    tba.h.push_back(parse_expr("sin(b1)", ctxT));

    PicardOptions opts;
    const PicardResult rab =
        picard_iterate(ab, terminal_field(e, tab, 2), e, 0, 8, opts);
    const PicardResult rba =
        picard_iterate(ba, terminal_field(e, tba, 2), e, 0, 8, opts);
    for (std::size_t m = 0; m < 1500; ++m)
        for (std::size_t k = 0; k <= 8; ++k) {
            CHECK(rab.solution.Y.at(m, k)[0] == rba.solution.Y.at(m, k)[1]);
            CHECK(rab.solution.Y.at(m, k)[1] == rba.solution.Y.at(m, k)[0]);
        }
}

TEST_CASE("diagonal quadratic pair matches the exponential-transform oracle") {
    const GeneratorModel m = fixtures::diag_quad_model(2, 1, 1.0, {+1, -1});
    const PathEnsemble e = simulate_antithetic(kSeed, 20000, 50, 1.0, 1);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 1), 2);
    PicardOptions opts;
    const PicardResult r = picard_iterate(m, terminal, e, 0, 50, opts);
    CHECK(r.trace.converged);

    auto hsin = [](double b) { return std::sin(b); };
    const OracleCase oc = pure_quadratic_case({1.0, 1.0}, {+1, -1}, {hsin, hsin}, 1.0);
    CHECK(std::fabs(y0_mean(r.solution.Y, 0) - oc.y0[0]) < 1e-2);
    CHECK(std::fabs(y0_mean(r.solution.Y, 1) - oc.y0[1]) < 1e-2);
    // Odd terminal + antithetic ensemble: the concave component mirrors the
    // convex one to regression accuracy.
    CHECK(std::fabs(y0_mean(r.solution.Y, 0) + y0_mean(r.solution.Y, 1)) < 1e-3);
}

TEST_CASE("linear y-coupling converges to the ODE oracle") {
    GeneratorModel m;
    m.constants.n = 2;
    m.constants.d = 1;
    m.constants.T = 1.0;
    m.constants.beta = 1.0;
    m.constants.phi = PhiFunction::power(1.0, 1.0);
    m.components.assign(2, LinearYComponent{1.0});
    m.diagonal.assign(2, true);

    const PathEnsemble e = simulate_antithetic(kSeed, 10000, 25, 1.0, 1);
    std::vector<double> terminal(e.paths() * 2, 1.0); // xi = (1, 1)
    PicardOptions opts;
    opts.tol = 1e-6;
    const PicardResult r = picard_iterate(m, terminal, e, 0, 25, opts);
    CHECK(r.trace.converged);
    // The frozen-y recursion lands on the implicit-Euler fixed point
    // (1 - beta dt)^{-N}, which tends to e^{beta T} as the grid refines.
    const double dt = e.grid().dt();
    const double discrete = std::pow(1.0 - dt, -25.0);
    CHECK(std::fabs(y0_mean(r.solution.Y, 0) - discrete) < 1e-3);
    CHECK(std::fabs(y0_mean(r.solution.Y, 1) - discrete) < 1e-3);
    CHECK(std::fabs(y0_mean(r.solution.Y, 0) - std::exp(1.0)) < 6e-2);
}

TEST_CASE("contraction on a Lipschitz + quadratic instance, ratio below one") {
    const GeneratorModel m = fixtures::picard_b_model(2, 1, 0.5, 1.0, 0.8);
    const PathEnsemble e = simulate_antithetic(kSeed, 20000, 40, 0.8, 1);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 1), 2);
    PicardOptions opts;
    const PicardResult r = picard_iterate(m, terminal, e, 0, 40, opts);
    CHECK(r.trace.converged);
    CHECK(r.trace.records.size() <= 15);
    CHECK(r.trace.records.back().dY <= 1e-4);
    // dY is eventually decreasing; final dY beats iteration 2.
    REQUIRE(r.trace.records.size() >= 3);
    CHECK(r.trace.records.back().dY < r.trace.records[1].dY);
    for (std::size_t i = 2; i < r.trace.records.size(); ++i)
        CHECK(r.trace.records[i].ratio < 1.0);
}

TEST_CASE("frozen-Y recursion refuses non-diagonal models without an override") {
    const GeneratorModel m = fixtures::remark26_model(); // reads norm(z): not diagonal
    const PathEnsemble e = simulate(kSeed, 500, 8, 1.0, 2);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 2), 2);
    PicardOptions opts;
    CHECK_THROWS_AS(picard_iterate(m, terminal, e, 0, 8, opts), ConfigError);
}

TEST_CASE("divergence detector aborts after three consecutive increases") {
    GeneratorModel m;
    m.constants.n = 1;
    m.constants.d = 1;
    m.constants.T = 3.0;
    m.constants.beta = 3.0;
    m.constants.phi = PhiFunction::power(3.0, 1.0);
    m.components.assign(1, LinearYComponent{3.0});
    m.diagonal.assign(1, true);

    const PathEnsemble e = simulate(kSeed, 2000, 30, 3.0, 1);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(1, 1), 1);
    PicardOptions opts;
    opts.max_iters = 30;
    opts.derive_certificates = false; // let the 3-strikes rule fire, not the guard
    const PicardResult r = picard_iterate(m, terminal, e, 0, 30, opts);
    CHECK(r.trace.diverged);
    CHECK(r.trace.records.size() < 10);
}

TEST_CASE("theta monitor: identities at equal iterates and 1/(1-theta) growth") {
    const PathEnsemble e = simulate(kSeed, 500, 4, 1.0, 1);
    YField A = YField::zeros(500, 1, 0, 4);
    for (std::size_t m = 0; m < 500; ++m)
        for (std::size_t k = 0; k <= 4; ++k)
            A.at(m, k)[0] = std::sin(static_cast<double>(m + k));

    // Equal iterates: delta_theta Y = Y^(m) for every theta.
    {
        const ThetaReport rep = theta_monitor({A, A}, {5, 6}, 0.5, 2.0, 1.0);
        REQUIRE(rep.rows.size() == 1);
        double sup = 0.0;
        for (std::size_t m = 0; m < 500; ++m) {
            double s = 0.0;
            for (std::size_t k = 0; k <= 4; ++k)
                s = std::max(s, 2.0 * std::fabs(A.at(m, k)[0]));
            sup = std::max(sup, s);
        }
        CHECK(rep.rows[0].sup_mean <= sup + 1e-12);
        CHECK(rep.rows[0].exp_moment > 1.0);
    }

    // Distinct iterates: sup grows like 1/(1-theta), and a large gap forces
    // the monitor to report at a reduced q.
    {
        YField B = A;
        for (auto& v : B.v) v += 40.0;
        const ThetaReport near1 = theta_monitor({A, B}, {1, 2}, 0.99, 2.0, 1.0);
        const ThetaReport mid = theta_monitor({A, B}, {1, 2}, 0.5, 2.0, 1.0);
        CHECK(near1.rows[0].sup_mean > 10.0 * mid.rows[0].sup_mean / 2.0);
        CHECK(near1.rows[0].overflow);
        CHECK(near1.rows[0].q_used < 2.0);
        CHECK(std::isfinite(near1.rows[0].log_exp_moment));
    }
}

TEST_CASE("theta monitor exponential moment stays bounded on a converging run") {
    const GeneratorModel m = fixtures::picard_b_model(2, 1, 0.5, 1.0, 0.8);
    const PathEnsemble e = simulate_antithetic(kSeed, 5000, 20, 0.8, 1);
    const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 1), 2);
    PicardOptions opts;
    opts.window = 6;
    opts.tol = 1e-7;
    const PicardResult r = picard_iterate(m, terminal, e, 0, 20, opts);
    REQUIRE(r.window.size() >= 3);
    const ThetaReport rep = theta_monitor(r.window, r.window_indices, 0.5, 2.0, 1.0);
    REQUIRE(rep.rows.size() >= 2);
    const double first = rep.rows.front().exp_moment;
    for (const ThetaRow& row : rep.rows) {
        CHECK(!row.overflow);
        CHECK(row.exp_moment <= 2.0 * first);
    }
}

TEST_CASE("uniqueness probe: both initializations meet at the same field") {
    {
        GeneratorModel m;
        m.constants.n = 1;
        m.constants.d = 1;
        m.components.assign(1, ZeroComponent{});
        m.diagonal.assign(1, true);
        const PathEnsemble e = simulate(kSeed, 2000, 10, 1.0, 1);
        const auto terminal = terminal_field(e, fixtures::sin_terminal(1, 1), 1);
        PicardOptions opts;
        const UniquenessReport rep = uniqueness_probe(m, terminal, e, 0, 10, opts,
                                                      PicardInit::Zero,
                                                      PicardInit::TerminalFlat);
        CHECK(rep.both_converged);
        CHECK(rep.sup_difference == 0.0); // the zero driver forgets the start
    }
    {
        const GeneratorModel m = fixtures::picard_b_model(2, 1, 0.5, 1.0, 0.8);
        const PathEnsemble e = simulate_antithetic(kSeed, 10000, 25, 0.8, 1);
        const auto terminal = terminal_field(e, fixtures::sin_terminal(2, 1), 2);
        PicardOptions opts;
        const UniquenessReport rep = uniqueness_probe(m, terminal, e, 0, 25, opts,
                                                      PicardInit::Zero,
                                                      PicardInit::TerminalFlat);
        CHECK(rep.both_converged);
        CHECK(rep.sup_difference <= 2.0 * opts.tol);
    }
}
