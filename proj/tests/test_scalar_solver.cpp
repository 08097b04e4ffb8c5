#include "doctest.h"

#include <cmath>

#include "qbsde/norms.hpp"
#include "qbsde/oracle.hpp"
#include "qbsde/scalar_solver.hpp"

using namespace qbsde;

namespace {

std::vector<double> terminal_of(const PathEnsemble& e,
                                const std::function<double(double)>& h) {
    std::vector<double> out(e.paths());
    for (std::size_t m = 0; m < e.paths(); ++m) out[m] = h(e.state(m, e.grid().N)[0]);
    return out;
}

double y0_mean(const ScalarSolution& s) {
    double acc = 0.0;
    for (std::size_t m = 0; m < s.M; ++m) acc += s.y(m, s.k_lo);
    return acc / static_cast<double>(s.M);
}

ScalarDriver quadratic_driver(double gamma) {
    ScalarDriver drv;
    drv.gamma = std::fabs(gamma);
    drv.f = [gamma](std::size_t, std::size_t, std::span<const double> z) {
        double n2 = 0.0;
        for (double v : z) n2 += v * v;
        return 0.5 * gamma * n2;
    };
    return drv;
}

} // namespace

TEST_CASE("zero driver with constant terminal is reproduced exactly") {
    const PathEnsemble e = simulate(21, 4000, 10, 1.0, 1);
    ScalarDriver drv;
    drv.f = [](std::size_t, std::size_t, std::span<const double>) { return 0.0; };
    std::vector<double> terminal(e.paths(), 2.5);
    const ScalarSolution s = solve_scalar(drv, terminal, e, 0, e.grid().N);
    for (std::size_t m = 0; m < s.M; ++m) {
        CHECK(s.y(m, e.grid().N) == 2.5);
        for (std::size_t k = 0; k < e.grid().N; ++k) {
            CHECK(s.y(m, k) == doctest::Approx(2.5).epsilon(1e-12));
            CHECK(std::fabs(s.z(m, k)[0]) < 1e-10);
        }
    }
}

TEST_CASE("terminal values are kept exactly per path") {
    const PathEnsemble e = simulate(22, 1000, 8, 1.0, 1);
    const auto terminal = terminal_of(e, [](double b) { return std::sin(b); });
    const ScalarSolution s = solve_scalar(quadratic_driver(1.0), terminal, e, 0, 8);
    for (std::size_t m = 0; m < s.M; ++m) CHECK(s.y(m, 8) == terminal[m]);
}

TEST_CASE("zero driver: cross-sectional mean of Y is constant in k") {
    const PathEnsemble e = simulate(23, 20000, 12, 1.0, 1);
    ScalarDriver drv;
    drv.f = [](std::size_t, std::size_t, std::span<const double>) { return 0.0; };
    const auto terminal = terminal_of(e, [](double b) { return std::tanh(b) + 0.3; });
    const ScalarSolution s = solve_scalar(drv, terminal, e, 0, 12);
    double mean_T = 0.0;
    for (std::size_t m = 0; m < s.M; ++m) mean_T += s.y(m, 12);
    mean_T /= static_cast<double>(s.M);
    for (std::size_t k = 0; k <= 12; ++k) {
        double mean_k = 0.0;
        for (std::size_t m = 0; m < s.M; ++m) mean_k += s.y(m, k);
        mean_k /= static_cast<double>(s.M);
        CHECK(mean_k == doctest::Approx(mean_T).epsilon(1e-9));
    }
}

TEST_CASE("Girsanov linear driver: f = z, h(b) = b gives Y0 = 1") {
    const PathEnsemble e = simulate_antithetic(24, 20000, 25, 1.0, 1);
    ScalarDriver drv;
    drv.f = [](std::size_t, std::size_t, std::span<const double> z) { return z[0]; };
    const auto terminal = terminal_of(e, [](double b) { return b; });
    const ScalarSolution s = solve_scalar(drv, terminal, e, 0, 25);
    CHECK(std::fabs(y0_mean(s) - 1.0) < 2e-2);
}

TEST_CASE("exponential-transform driver: exact linear terminal gives Y0 = 0.5") {
    const PathEnsemble e = simulate_antithetic(25, 20000, 50, 1.0, 1);
    const auto terminal = terminal_of(e, [](double b) { return b; });
    const ScalarSolution s = solve_scalar(quadratic_driver(1.0), terminal, e, 0, 50);
    CHECK(std::fabs(y0_mean(s) - 0.5) < 1e-2);
}

TEST_CASE("exponential-transform driver: clamped terminal matches quadrature") {
    const PathEnsemble e = simulate_antithetic(20260811, 20000, 50, 1.0, 1);
    auto clamp3 = [](double b) { return std::min(std::max(b, -3.0), 3.0); };
    const double oracle = cole_hopf_value(1.0, clamp3, 1.0);
    const auto terminal = terminal_of(e, clamp3);
    ScalarDriver drv = quadratic_driver(1.0);
    drv.eta_sup = 3.0;
    const ScalarSolution s = solve_scalar(drv, terminal, e, 0, 50);
    CHECK(std::fabs(y0_mean(s) - oracle) < 1e-2);
}

TEST_CASE("comparison: smaller driver gives smaller Y0, gap tracks the constant") {
    const PathEnsemble e = simulate_antithetic(27, 20000, 25, 1.0, 1);
    const auto terminal = terminal_of(e, [](double b) { return std::sin(b); });
    ScalarDriver f2 = quadratic_driver(1.0);
    ScalarDriver f1 = quadratic_driver(1.0);
    f1.f = [](std::size_t, std::size_t, std::span<const double> z) {
        return 0.5 * z[0] * z[0] - 1.0;
    };
    const ScalarSolution s1 = solve_scalar(f1, terminal, e, 0, 25);
    const ScalarSolution s2 = solve_scalar(f2, terminal, e, 0, 25);
    CHECK(y0_mean(s1) <= y0_mean(s2) + 1e-10);
    CHECK(std::fabs((y0_mean(s2) - y0_mean(s1)) - 1.0) < 2e-2);
}

TEST_CASE("convergence: error decreases as the grid refines (common paths)") {
    const PathEnsemble fine = simulate_antithetic(28, 40000, 40, 1.0, 1);
    auto clamp3 = [](double b) { return std::min(std::max(b, -3.0), 3.0); };
    const double oracle = cole_hopf_value(1.0, clamp3, 1.0);
    double err[3];
    int i = 0;
    for (std::size_t factor : {4, 2, 1}) {
        const PathEnsemble e = coarsen(fine, factor);
        const auto terminal = terminal_of(e, clamp3);
        const ScalarSolution s = solve_scalar(quadratic_driver(1.0), terminal, e, 0,
                                              e.grid().N);
        err[i++] = std::fabs(y0_mean(s) - oracle);
    }
    CHECK(err[2] < err[0]); // N=40 beats N=10
}

TEST_CASE("divergence guard aborts with a diagnostic") {
    const PathEnsemble e = simulate(29, 2000, 10, 1.0, 1);
    ScalarDriver drv;
    drv.f = [](std::size_t, std::size_t, std::span<const double>) { return 1e9; };
    drv.y_sup_bound = 1.0;
    const auto terminal = terminal_of(e, [](double b) { return b; });
    CHECK_THROWS_AS(solve_scalar(drv, terminal, e, 0, 10), SolverError);
}

TEST_CASE("a priori sup-norm bound formula (A.2 shape)") {
    StructuralConstants c;
    c.n = 1;
    c.gamma = 1.0;
    c.C2 = 0.0;
    CHECK(apriori_sup_bound(c, 1.0, 0.0, 0.0, 0.5) ==
          doctest::Approx(std::log(2.0) + 1.0).epsilon(1e-14));
    // Growth terms vanish for lambda = 0, phi = 0 at any t.
    c.C2 = 0.7;
    CHECK(apriori_sup_bound(c, 2.0, 5.0, 3.0, 0.0) ==
          doctest::Approx(std::log(2.0) + 2.0 + 0.7).epsilon(1e-14));
}

TEST_CASE("a priori BMO bound formula (A.3 shape) and monotonicity") {
    StructuralConstants c;
    c.n = 1;
    c.gamma = 1.0;
    const AprioriBmo base = apriori_bmo_bound(c, 0.0, 0.0, 0.0, 0.0, 0.0);
    CHECK(base.value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(!base.overflow);
    double prev = base.value;
    for (double ysup : {0.5, 1.0, 2.0, 4.0}) {
        const AprioriBmo r = apriori_bmo_bound(c, 0.0, 0.0, 0.0, ysup, 0.0);
        CHECK(r.value > prev);
        prev = r.value;
    }
    CHECK(apriori_bmo_bound(c, 400.0, 0.0, 0.0, 0.0, 0.0).overflow);
}

TEST_CASE("measured solution statistics sit under the a priori bounds") {
    const PathEnsemble e = simulate_antithetic(30, 20000, 50, 1.0, 1);
    auto clamp3 = [](double b) { return std::min(std::max(b, -3.0), 3.0); };
    const auto terminal = terminal_of(e, clamp3);
    const ScalarSolution s = solve_scalar(quadratic_driver(1.0), terminal, e, 0, 50);

    StructuralConstants c;
    c.n = 1;
    c.gamma = 1.0;

    double s_inf = 0.0;
    for (std::size_t m = 0; m < s.M; ++m)
        for (std::size_t k = 0; k <= 50; ++k) s_inf = std::max(s_inf, std::fabs(s.y(m, k)));
    const double a2 = apriori_sup_bound(c, 3.0, 0.0, 0.0, 0.0);
    CHECK(s_inf <= a2 + 0.05);

    const double bmo = norms::bmo(norms::zfield_of(s), e, s.k_lo, s.k_hi, 4).value;
    const AprioriBmo a3 = apriori_bmo_bound(c, 3.0, 0.0, 0.0, s_inf, 0.0);
    CHECK(bmo * bmo <= a3.value * 1.10);
}

TEST_CASE("conditional exponential bound dominates the solved field") {
    const PathEnsemble e = simulate_antithetic(31, 10000, 25, 1.0, 1);
    const std::size_t W = 26;
    std::vector<double> alpha_tail(e.paths() * W, 0.0); // pure quadratic: alpha_bar = 0

    {
        // Sign-mixed terminal: the |eta| bound carries genuine slack over the
        // attained exp(gamma Y), so pointwise domination on the bulk is robust
        // to regression wiggle on both sides.
        auto clamp2 = [](double b) { return std::min(std::max(b, -2.0), 2.0); };
        const auto terminal = terminal_of(e, clamp2);
        const ScalarSolution s = solve_scalar(quadratic_driver(1.0), terminal, e, 0, 25);
        const auto bound = apriori_exponential_bound(1.0, e, 0, 25, terminal, alpha_tail,
                                                     SignMode::Absolute);
        // Pointwise both sides are fitted polynomials, so near-equality
        // regions leave a residual violation rate; require it small and the
        // cross-sectional mean domination to hold at every node.
        std::size_t violations = 0, checked = 0;
        for (std::size_t m = 0; m < e.paths(); ++m)
            for (std::size_t k = 0; k <= 25; ++k) {
                const double spread = 2.5 * std::sqrt(std::max(e.grid().node(k), 1e-9));
                if (std::fabs(e.state(m, k)[0]) > spread) continue;
                ++checked;
                if (std::fabs(s.y(m, k)) > bound[m * W + k] + 0.05) ++violations;
            }
        CHECK(checked > 100000);
        CHECK(static_cast<double>(violations) < 0.01 * static_cast<double>(checked));
        for (std::size_t k = 0; k <= 25; ++k) {
            double mb = 0.0, my = 0.0;
            for (std::size_t m = 0; m < e.paths(); ++m) {
                mb += bound[m * W + k];
                my += std::fabs(s.y(m, k));
            }
            CHECK(mb / static_cast<double>(e.paths()) + 0.01 >=
                  my / static_cast<double>(e.paths()));
        }
    }

    {
        // Nonnegative terminal: the transform attains the bound; check the
        // equality at t = 0 where both conditionings are plain means.
        auto hpos = [](double b) { return std::min(std::max(b, -2.0), 2.0) + 2.0; };
        const auto terminal = terminal_of(e, hpos);
        const ScalarSolution s = solve_scalar(quadratic_driver(1.0), terminal, e, 0, 25);
        const auto bound = apriori_exponential_bound(1.0, e, 0, 25, terminal, alpha_tail,
                                                     SignMode::Absolute);
        double b0 = 0.0, y0 = 0.0;
        for (std::size_t m = 0; m < e.paths(); ++m) {
            b0 += bound[m * W + 0];
            y0 += std::fabs(s.y(m, 0));
        }
        b0 /= static_cast<double>(e.paths());
        y0 /= static_cast<double>(e.paths());
        CHECK(std::fabs(b0 - y0) < 2e-2);
    }
}

TEST_CASE("positive-part variant dominates Y+ for a one-sided driver") {
    // f = -|z|^2 + 1 <= alpha_bar + (gamma/2)|z|^2 with alpha_bar = 1.
    const PathEnsemble e = simulate_antithetic(32, 10000, 25, 1.0, 1);
    ScalarDriver drv;
    drv.gamma = 2.0;
    drv.f = [](std::size_t, std::size_t, std::span<const double> z) {
        return -(z[0] * z[0]) + 1.0;
    };
    const auto terminal = terminal_of(e, [](double b) { return std::sin(b); });
    const ScalarSolution s = solve_scalar(drv, terminal, e, 0, 25);

    const std::size_t W = 26;
    std::vector<double> alpha_tail(e.paths() * W);
    for (std::size_t m = 0; m < e.paths(); ++m)
        for (std::size_t k = 0; k <= 25; ++k)
            alpha_tail[m * W + k] = 1.0 * (e.grid().T - e.grid().node(k));
    const auto bound = apriori_exponential_bound(2.0, e, 0, 25, terminal, alpha_tail,
                                                 SignMode::PositivePart);
    std::size_t violations = 0, checked = 0;
    for (std::size_t m = 0; m < e.paths(); ++m)
        for (std::size_t k = 0; k <= 25; ++k) {
            const double spread = 2.5 * std::sqrt(std::max(e.grid().node(k), 1e-9));
            if (std::fabs(e.state(m, k)[0]) > spread) continue;
            ++checked;
            if (std::max(s.y(m, k), 0.0) > bound[m * W + k] + 0.05) ++violations;
        }
    CHECK(checked > 100000);
    CHECK(static_cast<double>(violations) < 0.01 * static_cast<double>(checked));
}

TEST_CASE("lemma A.2 instruments: mode i reduces to the absolute bound, mode ii holds") {
    const PathEnsemble e = simulate_antithetic(33, 10000, 50, 1.0, 1);
    // g = (gamma_bar/2)|z|^2 - 1: satisfies the strict lower bound with alpha = 1.
    ScalarDriver drv;
    drv.gamma = 1.0;
    drv.f = [](std::size_t, std::size_t, std::span<const double> z) {
        return 0.5 * z[0] * z[0] - 1.0;
    };
    const auto terminal = terminal_of(e, [](double b) { return std::sin(b); });
    const ScalarSolution s = solve_scalar(drv, terminal, e, 0, 50);

    BudgetParams p;
    p.gamma = 1.0;
    p.gamma_bar = 1.0;
    p.beta = 0.0;
    p.lambda = 0.0;
    p.eta_sup = 1.0;
    p.alpha_int_sup = 1.0;

    // Mode i with beta = lambda = 0: deterministic bound eta_sup + alpha_int_sup + ln2/gamma.
    const auto mi = exp_sup_bound(p, e, 0, 50, {}, 4);
    for (std::size_t idx = 0; idx < mi.size(); ++idx)
        CHECK(mi[idx] == doctest::Approx(2.0).epsilon(1e-12));

    double y_sup = 0.0;
    for (std::size_t m = 0; m < s.M; ++m)
        for (std::size_t k = 0; k <= 50; ++k) y_sup = std::max(y_sup, std::fabs(s.y(m, k)));

    const double eps = p.gamma_bar / 9.0;
    const ExpQvBound mii = exp_qv_bound(p, eps, e, s, y_sup, {}, 4);
    // Left side at t = 0 (conditional expectation = plain mean there).
    double lhs0 = 0.0;
    for (std::size_t m = 0; m < s.M; ++m) lhs0 += mii.lhs[m * 51 + 0];
    lhs0 /= static_cast<double>(s.M);
    CHECK(lhs0 <= mii.rhs * 1.10);
    CHECK_THROWS_AS(exp_qv_bound(p, 1.0, e, s, y_sup, {}, 4), ConfigError);
}
