#include "qbsde/bounds.hpp"

#include <cmath>
#include <limits>

namespace qbsde::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kMaxExpArg = std::log(std::numeric_limits<double>::max());

double safe_exp(double arg, bool& overflow) {
    if (arg > kMaxExpArg) {
        overflow = true;
        return kInf;
    }
    return std::exp(arg);
}

// sum_{k=1}^{e} base^k, tracking overflow.
double geometric_tail(double base, long long e, bool& overflow) {
    double sum = 0.0;
    double pw = 1.0;
    for (long long k = 1; k <= e; ++k) {
        pw *= base;
        sum += pw;
        if (!std::isfinite(sum)) {
            overflow = true;
            return kInf;
        }
    }
    return sum;
}

} // namespace

long long floor_int(double x) { return static_cast<long long>(std::floor(x)); }

double c_delta_lambda_n(double delta, double lambda, int n) {
    if (lambda == 0.0) return 0.0;
    const double e = (1.0 + delta) / (1.0 - delta);
    return 0.5 * (1.0 - delta) * std::pow(1.0 + delta, e) *
           std::pow(static_cast<double>(n) * lambda, 2.0 / (1.0 - delta));
}

LocalRadii local_radii(const StructuralConstants& c) {
    LocalRadii r;
    const double n = c.n;
    r.k1 = (n / c.gamma) * std::log(2.0) + n * (c.C1 + c.C2);
    const double t1 = (n / (c.gamma * c.gamma)) * safe_exp(2.0 * c.gamma * c.C1, r.overflow);
    const double t2 =
        (n / c.gamma) * safe_exp(4.0 * c.gamma * r.k1, r.overflow) * (1.0 + 2.0 * c.C2);
    r.k2 = t1 + t2;
    if (r.overflow) {
        r.eps0 = 0.0;
        return r;
    }

    const double e = (1.0 + c.delta) / (1.0 - c.delta);
    const double cdln = c_delta_lambda_n(c.delta, c.lambda, c.n);
    const double phi2k1 = c.phi(2.0 * r.k1);
    const double tail = cdln * std::pow(2.0 * r.k2, e);
    const double den1 = n * phi2k1 + n * std::pow(c.gamma, e) * tail;
    const double den2 = 2.0 * phi2k1 + 2.0 * tail;
    if (den1 == 0.0 && den2 == 0.0) {
        r.eps0 = kInf;
        r.eps0_unbounded = true;
        return r;
    }
    const double q1 = r.k1 / den1;
    const double q2 = (c.gamma / n) * safe_exp(-4.0 * c.gamma * r.k1, r.overflow) * r.k2 / den2;
    r.eps0 = std::min(q1, q2);
    return r;
}

StitchStep stitch_step(const StructuralConstants& c) {
    StitchStep s;
    if (c.beta == 0.0) {
        s.single_interval = true;
        s.eps = c.T;
        s.m0 = 1;
        return s;
    }
    s.eps = 1.0 / (2.0 * c.n * c.beta);
    s.m0 = static_cast<long long>(std::ceil(c.T / s.eps));
    if (s.m0 < 1) s.m0 = 1;
    return s;
}

GlobalBound interval_recursion_bound(const StructuralConstants& c, Variant v) {
    GlobalBound g;
    const double n = c.n;
    g.eps0_prime = std::min(c.gamma_bar / 9.0, c.gamma / (12.0 * (c.beta * c.T + 2.0)));

    const double powratio =
        std::pow((1.0 + c.delta) / 2.0, (1.0 + c.delta) / (1.0 - c.delta));
    const double two_over = 2.0 / (1.0 - c.delta);
    if (c.lambda > 0.0) {
        g.c3 = c.gamma_bar * g.eps0_prime * (1.0 - c.delta) / (8.0 * n) * powratio *
               std::pow(12.0 * n * c.lambda / c.gamma_bar, two_over);
        g.c4 = c.gamma_bar * g.eps0_prime * (1.0 - c.delta) / (4.0 * n) * powratio *
               std::pow(2.0 * n * n * c.lambda * c.gamma / (c.gamma_bar * g.eps0_prime),
                        two_over);
    }
    g.c5 = c.C2 + (6.0 * g.eps0_prime * c.C2 + 2.0 * g.c3 * c.T) / (n * c.gamma) +
           g.c4 * c.T / (n * c.gamma);

    if (v == Variant::I) {
        if (c.beta == 0.0) {
            g.bound = n * (c.C1 + c.C2);
            return g;
        }
        const long long e = floor_int(2.0 * n * c.beta * c.T) + 2;
        const double base = 2.0 * n;
        g.bound = std::pow(base, static_cast<double>(e)) * c.C1 +
                  geometric_tail(base, e, g.overflow) * c.C2;
    } else {
        if (c.beta == 0.0) {
            g.bound = 2.0 * n * (c.C1 + g.c5);
            return g;
        }
        const long long e = floor_int(4.0 * n * c.beta * c.T) + 2;
        const double base = 4.0 * n;
        g.bound = std::pow(base, static_cast<double>(e)) * c.C1 +
                  geometric_tail(base, e, g.overflow) * g.c5;
    }
    if (!std::isfinite(g.bound)) g.overflow = true;
    return g;
}

double gronwall_bound(const StructuralConstants& c, Variant v) {
    const double n = c.n;
    if (v == Variant::I)
        return n * (c.C1 + c.C2) * std::exp(n * c.beta * c.T);
    const GlobalBound g = interval_recursion_bound(c, Variant::II);
    return 2.0 * n * (c.C1 + g.c5) * std::exp(2.0 * n * c.beta * c.T);
}

ExpMomentConstants exp_moment_constants(const StructuralConstants& c, double q) {
    if (!(q > 1.0)) throw ConfigError("exp_moment_constants requires q > 1");
    auto A = [](double p) { return std::pow(p / (p - 1.0), 2.0 * p); };
    ExpMomentConstants e;
    const double n = c.n;
    const long long m = floor_int(2.0 * n * c.beta * c.T) + 1;
    e.a_q = A(q);
    e.coefficient = std::pow(A(2.0 * q) * A(8.0 * n * q), static_cast<double>(m));
    e.xi_weight = 4.0 * n * std::pow(8.0 * n, static_cast<double>(m)) * q * c.gamma;
    e.alpha_weight = 4.0 * n * std::pow(16.0 * n, static_cast<double>(m)) * q * c.gamma;
    return e;
}

YoungSplit young_split(double a, double b, double delta) {
    YoungSplit y;
    const double e = (1.0 + delta) / (1.0 - delta);
    y.bound = b * b + 0.5 * (1.0 - delta) * std::pow((1.0 + delta) / 2.0, e) *
                          std::pow(a, 2.0 / (1.0 - delta));
    y.lhs = a * std::pow(b, 1.0 + delta);
    return y;
}

UniquenessStep uniqueness_step(const StructuralConstants& c) {
    UniquenessStep u;
    if (c.beta == 0.0) {
        u.global = true;
        u.eps_bar = c.T;
        return u;
    }
    u.eps_bar = 1.0 / (8.0 * c.n * c.beta);
    return u;
}

BoundReport bound_report(const StructuralConstants& c, double q) {
    BoundReport rep;
    auto put = [&](const std::string& key, double v, const std::string& status = "ok") {
        rep.entries[key] = BoundEntry{v, status};
    };

    put("c_dln", c_delta_lambda_n(c.delta, c.lambda, c.n));

    const LocalRadii lr = local_radii(c);
    const std::string lr_status = lr.overflow ? "overflow" : "ok";
    put("k1", lr.k1, "ok");
    put("k2", lr.k2, lr_status);
    put("eps0", lr.eps0, lr.overflow ? "overflow" : (lr.eps0_unbounded ? "unbounded" : "ok"));

    const StitchStep st = stitch_step(c);
    put("eps_stitch", st.eps, st.single_interval ? "single-interval" : "ok");
    put("m0", static_cast<double>(st.m0), st.single_interval ? "single-interval" : "ok");

    const GlobalBound g1 = interval_recursion_bound(c, Variant::I);
    const GlobalBound g2 = interval_recursion_bound(c, Variant::II);
    put("lemma41_i", g1.bound, g1.overflow ? "overflow" : "ok");
    put("lemma41_ii", g2.bound, g2.overflow ? "overflow" : "ok");
    put("c3", g2.c3);
    put("c4", g2.c4);
    put("c5", g2.c5);
    put("gronwall_i", gronwall_bound(c, Variant::I));
    put("gronwall_ii", gronwall_bound(c, Variant::II));

    const ExpMomentConstants em = exp_moment_constants(c, q);
    put("a_q", em.a_q);
    put("k_q_coefficient", em.coefficient);
    put("k_q_xi_weight", em.xi_weight);
    put("k_q_alpha_weight", em.alpha_weight);

    const UniquenessStep u = uniqueness_step(c);
    put("eps_bar", u.eps_bar, u.global ? "global" : "ok");
    return rep;
}

} // namespace qbsde::bounds
