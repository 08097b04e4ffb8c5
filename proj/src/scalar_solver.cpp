#include "qbsde/scalar_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qbsde/bounds.hpp"
#include "qbsde/parallel.hpp"

namespace qbsde {

namespace {

const double kMaxExpArg = std::log(std::numeric_limits<double>::max());

double clip_row(std::span<double> z, double limit) {
    double norm2 = 0.0;
    for (double v : z) norm2 += v * v;
    const double norm = std::sqrt(norm2);
    if (norm <= limit || norm == 0.0) return 0.0;
    const double s = limit / norm;
    for (double& v : z) v *= s;
    return 1.0;
}

} // namespace

ScalarSolution solve_scalar(const ScalarDriver& driver, std::span<const double> terminal,
                            const PathEnsemble& ensemble, std::size_t k_lo, std::size_t k_hi,
                            const SolverOptions& opts) {
    const std::size_t M = ensemble.paths();
    const std::size_t d = ensemble.dim();
    if (terminal.size() != M) throw ConfigError("terminal size must match the path count");
    if (k_hi <= k_lo || k_hi > ensemble.grid().N)
        throw ConfigError("solve_scalar needs k_lo < k_hi <= N");
    if (opts.basis_degree < 1 || opts.inner_iters < 1)
        throw ConfigError("basis_degree and inner_iters must be >= 1");

    const double dt = ensemble.grid().dt();

    ScalarSolution sol;
    sol.M = M;
    sol.d = d;
    sol.k_lo = k_lo;
    sol.k_hi = k_hi;
    const std::size_t W = sol.window_nodes();
    sol.Y.assign(M * W, 0.0);
    sol.Z.assign(M * W * d, 0.0);

    double z_clip = 1e3;
    if (opts.z_clip) {
        z_clip = *opts.z_clip;
    } else if (driver.bmo_sq_bound && *driver.bmo_sq_bound > 0.0 &&
               std::isfinite(*driver.bmo_sq_bound)) {
        z_clip = 5.0 * std::sqrt(*driver.bmo_sq_bound) / std::sqrt(dt);
    }
    sol.z_clip_used = z_clip;

    for (std::size_t m = 0; m < M; ++m) sol.y(m, k_hi) = terminal[m];

    std::vector<double> ynext(terminal.begin(), terminal.end());
    std::vector<double> target(M), fval(M, 0.0);
    std::vector<std::vector<double>> ztargets(d, std::vector<double>(M));

    for (std::size_t k = k_hi; k-- > k_lo;) {
        const NodeRegression reg(ensemble, k, opts.basis_degree);

        StepDiagnostics diag;
        diag.k = k;
        RegressionDiagnostics rd;
        const std::vector<double> ey = reg.fit(ynext, &rd);
        diag.residual_rms = rd.residual_rms;
        diag.rank = rd.rank;
        diag.dropped_columns = rd.dropped_columns;

        std::fill(fval.begin(), fval.end(), 0.0);
        std::vector<double> clipped_count(chunk_count(M), 0.0);

        for (int iter = 0; iter < opts.inner_iters; ++iter) {
            // Z regression from the centered increment: the fitted center is
            // subtracted so the target variance stays O(|Z|^2) instead of
            // O(|Y|^2/dt).
            for (std::size_t m = 0; m < M; ++m) target[m] = ynext[m] + dt * fval[m];
            const std::vector<double> center = (iter == 0) ? ey : reg.fit(target);
            for (std::size_t j = 0; j < d; ++j) {
                auto& zt = ztargets[j];
                parallel_chunks(M, [&](std::size_t, std::size_t lo, std::size_t hi) {
                    for (std::size_t m = lo; m < hi; ++m)
                        zt[m] = (target[m] - center[m]) * ensemble.increment(m, k, j) / dt;
                });
                const std::vector<double> zf = reg.fit(zt);
                for (std::size_t m = 0; m < M; ++m) sol.z(m, k)[j] = zf[m];
            }
            std::fill(clipped_count.begin(), clipped_count.end(), 0.0);
            parallel_chunks(M, [&](std::size_t c, std::size_t lo, std::size_t hi) {
                for (std::size_t m = lo; m < hi; ++m) {
                    clipped_count[c] += clip_row(sol.z(m, k), z_clip);
                    fval[m] = driver.f(k, m, sol.z(m, k));
                }
            });
        }
        for (double c : clipped_count) diag.clipped += static_cast<std::size_t>(c);

        double ymax = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            const double yv = ey[m] + dt * fval[m];
            sol.y(m, k) = yv;
            ymax = std::max(ymax, std::fabs(yv));
        }
        if (driver.y_sup_bound && std::isfinite(*driver.y_sup_bound) &&
            ymax > opts.divergence_factor * *driver.y_sup_bound) {
            throw SolverError("scalar solve diverged at node " + std::to_string(k) +
                              ": sup|Y| = " + std::to_string(ymax) + " exceeds " +
                              std::to_string(opts.divergence_factor) + " x bound " +
                              std::to_string(*driver.y_sup_bound));
        }
        for (std::size_t m = 0; m < M; ++m) ynext[m] = sol.y(m, k);
        sol.steps.push_back(diag);
    }
    return sol;
}

double apriori_sup_bound(const StructuralConstants& c, double eta_sup, double U_sup, double V_bmo,
                  double t) {
    const double e = (1.0 + c.delta) / (1.0 - c.delta);
    const double cdln = bounds::c_delta_lambda_n(c.delta, c.lambda, c.n);
    return std::log(2.0) / c.gamma + eta_sup + c.C2 + c.phi(U_sup) * (c.T - t) +
           std::pow(c.gamma, e) * cdln * std::pow(V_bmo, 2.0 * e) * (c.T - t);
}

AprioriBmo apriori_bmo_bound(const StructuralConstants& c, double eta_sup, double U_sup,
                     double V_bmo, double Y_sup, double t) {
    AprioriBmo r;
    const double e = (1.0 + c.delta) / (1.0 - c.delta);
    const double cdln = bounds::c_delta_lambda_n(c.delta, c.lambda, c.n);
    const double a1 = 2.0 * c.gamma * eta_sup;
    const double a2 = 2.0 * c.gamma * Y_sup;
    if (a1 > kMaxExpArg || a2 > kMaxExpArg) {
        r.overflow = true;
        r.value = std::numeric_limits<double>::infinity();
        return r;
    }
    r.value = std::exp(a1) / (c.gamma * c.gamma) +
              (std::exp(a2) / c.gamma) *
                  (1.0 + 2.0 * c.C2 + 2.0 * c.phi(U_sup) * (c.T - t) +
                   2.0 * cdln * std::pow(V_bmo, 2.0 * e) * (c.T - t));
    if (!std::isfinite(r.value)) r.overflow = true;
    return r;
}

std::vector<double> apriori_exponential_bound(double gamma, const PathEnsemble& ensemble,
                                              std::size_t k_lo, std::size_t k_hi,
                                              std::span<const double> eta,
                                              std::span<const double> alpha_tail,
                                              SignMode mode, int basis_degree) {
    const std::size_t M = ensemble.paths();
    const std::size_t W = k_hi - k_lo + 1;
    if (eta.size() != M || alpha_tail.size() != M * W)
        throw ConfigError("apriori_exponential_bound: sample arrays sized M and M*W");

    std::vector<double> bound(M * W, 0.0);
    std::vector<double> payoff(M);
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        const std::size_t kw = k - k_lo;
        for (std::size_t m = 0; m < M; ++m) {
            const double base = mode == SignMode::Absolute ? std::fabs(eta[m])
                                                           : std::max(eta[m], 0.0);
            payoff[m] = std::exp(gamma * (base + alpha_tail[m * W + kw]));
        }
        std::vector<double> fitted;
        if (k == k_hi) {
            fitted = payoff; // conditional on F_T the payoff is itself
        } else {
            const NodeRegression reg(ensemble, k, basis_degree);
            fitted = reg.fit(payoff);
        }
        for (std::size_t m = 0; m < M; ++m)
            bound[m * W + kw] = std::max(0.0, std::log(std::max(fitted[m], 1.0)) / gamma);
    }
    return bound;
}

std::vector<double> exp_sup_bound(const BudgetParams& p, const PathEnsemble& ensemble,
                                    std::size_t k_lo, std::size_t k_hi,
                                    std::span<const double> vnorm, int basis_degree) {
    const std::size_t M = ensemble.paths();
    const std::size_t W = k_hi - k_lo + 1;
    const double dt = ensemble.grid().dt();
    const double T = ensemble.grid().T;

    // Per-path tail integral of lambda |V_s|^(1+delta).
    std::vector<double> tail(M * W, 0.0);
    if (!vnorm.empty()) {
        if (vnorm.size() != M * W) throw ConfigError("vnorm must be sized M*W");
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = k_hi; k-- > k_lo;) {
                const std::size_t kw = k - k_lo;
                tail[m * W + kw] = tail[m * W + kw + 1] +
                                   p.lambda * std::pow(vnorm[m * W + kw], 1.0 + p.delta) * dt;
            }
    }

    std::vector<double> out(M * W, 0.0);
    std::vector<double> payoff(M);
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        const std::size_t kw = k - k_lo;
        const double t = ensemble.grid().node(k);
        const double det = p.gamma * (p.eta_sup + p.alpha_int_sup) +
                           p.beta * p.gamma * p.U_sup * (T - t);
        for (std::size_t m = 0; m < M; ++m)
            payoff[m] = std::exp(det + p.gamma * tail[m * W + kw]);
        std::vector<double> fitted;
        if (k == k_hi) {
            fitted = payoff;
        } else {
            const NodeRegression reg(ensemble, k, basis_degree);
            fitted = reg.fit(payoff);
        }
        for (std::size_t m = 0; m < M; ++m)
            out[m * W + kw] = std::max(0.0, std::log(std::max(fitted[m], 1.0)) / p.gamma);
    }
    return out;
}

ExpQvBound exp_qv_bound(const BudgetParams& p, double eps,
                               const PathEnsemble& ensemble, const ScalarSolution& sol,
                               double y_sup_measured, std::span<const double> vnorm,
                               int basis_degree) {
    if (!(eps > 0.0) || eps > p.gamma_bar / 9.0 + 1e-15)
        throw ConfigError("mode ii requires eps in (0, gamma_bar/9]");
    const std::size_t M = sol.M;
    const std::size_t W = sol.window_nodes();
    const double dt = ensemble.grid().dt();
    const double T = ensemble.grid().T;

    // Tail quadratic variation of Z per path.
    std::vector<double> qv(M * W, 0.0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t k = sol.k_hi; k-- > sol.k_lo;) {
            const std::size_t kw = k - sol.k_lo;
            double n2 = 0.0;
            for (double v : sol.z(m, k)) n2 += v * v;
            qv[m * W + kw] = qv[m * W + kw + 1] + n2 * dt;
        }
    std::vector<double> vtail(M * W, 0.0);
    if (!vnorm.empty()) {
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = sol.k_hi; k-- > sol.k_lo;) {
                const std::size_t kw = k - sol.k_lo;
                vtail[m * W + kw] =
                    vtail[m * W + kw + 1] +
                    p.lambda * std::pow(vnorm[m * W + kw], 1.0 + p.delta) * dt;
            }
    }

    ExpQvBound r;
    r.lhs.assign(M * W, 1.0);
    std::vector<double> payoff(M);
    for (std::size_t k = sol.k_lo; k <= sol.k_hi; ++k) {
        const std::size_t kw = k - sol.k_lo;
        for (std::size_t m = 0; m < M; ++m)
            payoff[m] = std::exp(0.5 * p.gamma_bar * eps * qv[m * W + kw]);
        std::vector<double> fitted;
        if (k == sol.k_hi) {
            fitted = payoff;
        } else {
            const NodeRegression reg(ensemble, k, basis_degree);
            fitted = reg.fit(payoff);
        }
        for (std::size_t m = 0; m < M; ++m)
            r.lhs[m * W + kw] = std::max(1.0, fitted[m]);
    }

    // The displayed right side at the window start; vtail enters through its
    // ensemble supremum, everything else is deterministic.
    double vsup = 0.0;
    for (double v : vtail) vsup = std::max(vsup, v);
    const double t0 = ensemble.grid().node(sol.k_lo);
    r.rhs = std::exp(6.0 * eps * y_sup_measured + 3.0 * eps * p.alpha_int_sup +
                     3.0 * eps * p.beta * p.U_sup * (T - t0) + 3.0 * eps * vsup);
    return r;
}

} // namespace qbsde
