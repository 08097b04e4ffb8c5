#include "qbsde/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qbsde::norms {

namespace {

const double kMaxExpArg = std::log(std::numeric_limits<double>::max());

double vec_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// log of the mean of exp(args); stable log-sum-exp.
double log_mean_exp(const std::vector<double>& args) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double a : args) mx = std::max(mx, a);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double a : args) acc += std::exp(a - mx);
    return mx + std::log(acc / static_cast<double>(args.size()));
}

NormEstimate from_log(std::string name, double logv, std::string note) {
    NormEstimate e;
    e.name = std::move(name);
    e.log_value = logv;
    e.note = std::move(note);
    if (logv > kMaxExpArg) {
        e.overflow = true;
        e.value = std::numeric_limits<double>::infinity();
    } else {
        e.value = std::exp(logv);
    }
    return e;
}

} // namespace

double s_inf(const YField& y) {
    double mx = 0.0;
    for (std::size_t m = 0; m < y.M; ++m)
        for (std::size_t k = y.k_lo; k <= y.k_hi; ++k)
            mx = std::max(mx, vec_norm(y.at(m, k)));
    return mx;
}

double s_p(const YField& y, double p) {
    double acc = 0.0;
    for (std::size_t m = 0; m < y.M; ++m) {
        double sup = 0.0;
        for (std::size_t k = y.k_lo; k <= y.k_hi; ++k)
            sup = std::max(sup, vec_norm(y.at(m, k)));
        acc += std::pow(sup, p);
    }
    return std::pow(acc / static_cast<double>(y.M), 1.0 / p);
}

double h_p(const ZField& z, double dt, double p) {
    double acc = 0.0;
    for (std::size_t m = 0; m < z.M; ++m) {
        double qv = 0.0;
        for (std::size_t k = z.k_lo; k <= z.k_hi; ++k) {
            const auto mat = z.matrix(m, k);
            double n2 = 0.0;
            for (double v : mat) n2 += v * v;
            qv += n2 * dt;
        }
        acc += std::pow(qv, p / 2.0);
    }
    return std::pow(acc / static_cast<double>(z.M), 1.0 / p);
}

NormEstimate bmo(const ZField& z, const PathEnsemble& ensemble, std::size_t k_lo,
                 std::size_t k_hi, int basis_degree) {
    const std::size_t M = z.M;
    const std::size_t W = z.window_nodes();
    const double dt = ensemble.grid().dt();

    // Tail quadratic variation per path: sum_{j >= k} |Z_j|^2 dt.
    std::vector<double> tail(M * W, 0.0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = k_hi; k-- > k_lo;) {
            const auto mat = z.matrix(m, k);
            double n2 = 0.0;
            for (double v : mat) n2 += v * v;
            tail[m * W + (k - k_lo)] = tail[m * W + (k - k_lo) + 1] + n2 * dt;
        }

    NormEstimate e;
    e.name = "bmo";
    e.note = "grid-node supremum of fitted conditional tail QV; under-estimates the "
             "stopping-time supremum";
    double best = 0.0;
    std::vector<double> target(M);
    for (std::size_t k = k_lo; k < k_hi; ++k) {
        for (std::size_t m = 0; m < M; ++m) target[m] = tail[m * W + (k - k_lo)];
        const NodeRegression reg(ensemble, k, basis_degree);
        const std::vector<double> fitted = reg.fit(target);
        for (double f : fitted) best = std::max(best, f);
    }
    e.value = std::sqrt(std::max(best, 0.0));
    return e;
}

NormEstimate exp_moment(const YField& y, double p, double gamma) {
    std::vector<double> args(y.M);
    for (std::size_t m = 0; m < y.M; ++m) {
        double sup = 0.0;
        for (std::size_t k = y.k_lo; k <= y.k_hi; ++k)
            sup = std::max(sup, vec_norm(y.at(m, k)));
        args[m] = p * gamma * sup;
    }
    return from_log("exp_moment(p=" + std::to_string(p) + ")", log_mean_exp(args),
                    "ensemble mean of exp(p*gamma*sup_k |field|), log-sum-exp");
}

NormEstimate exp_moment_samples(std::span<const double> samples, double weight) {
    std::vector<double> args(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        args[i] = weight * std::fabs(samples[i]);
    return from_log("exp_moment_samples", log_mean_exp(args),
                    "ensemble mean of exp(weight*|x|), log-sum-exp");
}

YField yfield_of(const ScalarSolution& s) {
    YField f;
    f.M = s.M;
    f.n = 1;
    f.k_lo = s.k_lo;
    f.k_hi = s.k_hi;
    f.v = s.Y;
    return f;
}

ZField zfield_of(const ScalarSolution& s) {
    ZField f;
    f.M = s.M;
    f.n = 1;
    f.d = s.d;
    f.k_lo = s.k_lo;
    f.k_hi = s.k_hi;
    f.v = s.Z;
    return f;
}

} // namespace qbsde::norms
