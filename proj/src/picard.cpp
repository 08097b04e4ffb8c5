#include "qbsde/picard.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace qbsde {

namespace {

double vec_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Measured budget integral for the sup-norm certificate of one
// component driver: sup over paths of  sum_k [alpha(t_k, B_k) + phi(|U_k|) +
// n lambda |V_k|^(1+delta)] dt.
double alpha_tilde_integral(const GeneratorModel& model, const YField& U, const ZField& V,
                            const PathEnsemble& e, std::size_t k_lo, std::size_t k_hi) {
    const StructuralConstants& c = model.constants;
    const double dt = e.grid().dt();
    double sup = 0.0;
    for (std::size_t m = 0; m < e.paths(); ++m) {
        double acc = 0.0;
        for (std::size_t k = k_lo; k < k_hi; ++k) {
            double a = model.alpha_value(e.grid().node(k), e.state(m, k));
            a += c.phi(vec_norm(U.at(m, k)));
            a += static_cast<double>(c.n) * c.lambda *
                 std::pow(vec_norm(V.matrix(m, k)), 1.0 + c.delta);
            acc += a * dt;
        }
        sup = std::max(sup, acc);
    }
    return sup;
}

} // namespace

BsdeSolution gamma_map(const GeneratorModel& model, const YField& U, const ZField& V,
                       std::span<const double> terminal, const PathEnsemble& ensemble,
                       std::size_t k_lo, std::size_t k_hi, const SolverOptions& opts,
                       bool derive_certificates) {
    const StructuralConstants& c = model.constants;
    const auto n = static_cast<std::size_t>(c.n);
    const auto d = static_cast<std::size_t>(c.d);
    const std::size_t M = ensemble.paths();
    if (terminal.size() != M * n)
        throw ConfigError("gamma_map terminal must be M x n row-major");

    BsdeSolution sol;
    sol.Y = YField::zeros(M, n, k_lo, k_hi);
    sol.Z = ZField::zeros(M, n, d, k_lo, k_hi);
    sol.component_steps.resize(n);

    std::optional<double> alpha_int;
    if (derive_certificates)
        alpha_int = alpha_tilde_integral(model, U, V, ensemble, k_lo, k_hi);

    const TimeGrid& grid = ensemble.grid();
    std::vector<double> xi(M);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t m = 0; m < M; ++m) xi[m] = terminal[m * n + i];

        ScalarDriver drv;
        drv.gamma = c.gamma;
        drv.f = [&model, &U, &V, &grid, i, n, d](std::size_t k, std::size_t m,
                                                 std::span<const double> z) {
            thread_local std::vector<double> zfull;
            zfull.resize(n * d);
            const auto vmat = V.matrix(m, k);
            std::copy(vmat.begin(), vmat.end(), zfull.begin());
            std::copy(z.begin(), z.end(),
                      zfull.begin() + static_cast<std::ptrdiff_t>(i * d));
            return model.component(i, grid.node(k), U.at(m, k), zfull);
        };
        if (derive_certificates) {
            double eta_sup = 0.0;
            for (double v : xi) eta_sup = std::max(eta_sup, std::fabs(v));
            drv.eta_sup = eta_sup;
            drv.alpha_tilde_integral = alpha_int;
            const double y_bound = std::log(2.0) / c.gamma + eta_sup + *alpha_int;
            drv.y_sup_bound = y_bound;
            const double a1 = 2.0 * c.gamma * eta_sup;
            const double a2 = 2.0 * c.gamma * y_bound;
            const double max_arg = std::log(std::numeric_limits<double>::max());
            if (a1 < max_arg && a2 < max_arg)
                drv.bmo_sq_bound = std::exp(a1) / (c.gamma * c.gamma) +
                                   std::exp(a2) / c.gamma * (1.0 + 2.0 * *alpha_int);
        }

        const ScalarSolution comp = solve_scalar(drv, xi, ensemble, k_lo, k_hi, opts);
        sol.z_clip_used = comp.z_clip_used;
        sol.component_steps[i] = comp.steps;
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                sol.Y.at(m, k)[i] = comp.y(m, k);
                const auto src = comp.z(m, k);
                const auto dst = sol.Z.row(m, k, i);
                std::copy(src.begin(), src.end(), dst.begin());
            }
    }
    return sol;
}

PicardResult picard_iterate(const GeneratorModel& model, std::span<const double> terminal,
                            const PathEnsemble& ensemble, std::size_t k_lo,
                            std::size_t k_hi, const PicardOptions& opts) {
    const StructuralConstants& c = model.constants;
    const auto n = static_cast<std::size_t>(c.n);
    const auto d = static_cast<std::size_t>(c.d);
    const std::size_t M = ensemble.paths();
    const double dt = ensemble.grid().dt();

    if (opts.mode == PicardMode::FrozenY && !model.all_diagonal() &&
        !opts.allow_nondiagonal_frozen_y)
        throw ConfigError("the frozen-Y recursion needs a diagonal generator; use the "
                          "frozen-YV map or set the override");

    PicardResult res;
    YField Yprev = YField::zeros(M, n, k_lo, k_hi);
    ZField Zprev = ZField::zeros(M, n, d, k_lo, k_hi);
    if (opts.init == PicardInit::TerminalFlat) {
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = k_lo; k <= k_hi; ++k)
                for (std::size_t i = 0; i < n; ++i)
                    Yprev.at(m, k)[i] = terminal[m * n + i];
    }

    // In frozen-Y mode the off rows never enter a diagonal generator; the
    // zero V field realizes exactly the recursion driver g^i(t, Y^(m), z).
    const ZField zeroV = ZField::zeros(M, n, d, k_lo, k_hi);

    double prev_dY = std::numeric_limits<double>::infinity();
    int increases = 0;
    BsdeSolution current;

    for (int m = 1; m <= opts.max_iters; ++m) {
        const auto t0 = std::chrono::steady_clock::now();
        current = gamma_map(model, Yprev,
                            opts.mode == PicardMode::FrozenY ? zeroV : Zprev, terminal,
                            ensemble, k_lo, k_hi, opts.solver, opts.derive_certificates);
        const auto t1 = std::chrono::steady_clock::now();

        IterationRecord rec;
        rec.m = m;
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();

        double dY = 0.0;
        std::vector<double> diff(n);
        for (std::size_t pm = 0; pm < M; ++pm)
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                const auto a = current.Y.at(pm, k);
                const auto b = Yprev.at(pm, k);
                for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
                dY = std::max(dY, vec_norm(diff));
            }
        double dZacc = 0.0;
        for (std::size_t pm = 0; pm < M; ++pm) {
            double qv = 0.0;
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                const auto a = current.Z.matrix(pm, k);
                const auto b = Zprev.matrix(pm, k);
                for (std::size_t j = 0; j < n * d; ++j) {
                    const double v = a[j] - b[j];
                    qv += v * v;
                }
            }
            dZacc += qv * dt;
        }
        rec.dY = dY;
        rec.dZ = std::sqrt(dZacc / static_cast<double>(M));
        rec.ratio = std::isfinite(prev_dY) && prev_dY > 0.0 ? dY / prev_dY : 0.0;
        res.trace.records.push_back(rec);

        if (opts.window > 0) {
            res.window.push_back(current.Y);
            res.window_indices.push_back(m);
            if (res.window.size() > static_cast<std::size_t>(opts.window)) {
                res.window.erase(res.window.begin());
                res.window_indices.erase(res.window_indices.begin());
            }
        }
        if (opts.observer) opts.observer(m, current.Y, current.Z);

        if (dY <= opts.tol) {
            res.trace.converged = true;
            Yprev = std::move(current.Y);
            Zprev = std::move(current.Z);
            break;
        }
        if (dY > prev_dY) {
            if (++increases >= 3) {
                res.trace.diverged = true;
                res.trace.note = "dY increased on three consecutive iterations";
                Yprev = std::move(current.Y);
                Zprev = std::move(current.Z);
                break;
            }
        } else {
            increases = 0;
        }
        prev_dY = dY;
        Yprev = std::move(current.Y);
        Zprev = std::move(current.Z);
    }

    res.solution.Y = std::move(Yprev);
    res.solution.Z = std::move(Zprev);
    res.solution.component_steps = std::move(current.component_steps);
    res.solution.z_clip_used = current.z_clip_used;
    if (!res.trace.converged && !res.trace.diverged)
        res.trace.note = "tolerance not reached within max_iters";
    return res;
}

ThetaReport theta_monitor(const std::vector<YField>& iterates,
                          const std::vector<int>& iteration_indices, double theta, double q,
                          double gamma, int p) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw ConfigError("theta must lie in (0, 1)");
    if (iterates.size() != iteration_indices.size())
        throw ConfigError("iterates and indices must align");
    ThetaReport rep;
    rep.theta = theta;
    rep.q = q;
    if (iterates.size() < static_cast<std::size_t>(p) + 1) return rep;

    const double max_arg = std::log(std::numeric_limits<double>::max());
    for (std::size_t a = 0; a + static_cast<std::size_t>(p) < iterates.size(); ++a) {
        const YField& Ym = iterates[a];
        const YField& Ymp = iterates[a + static_cast<std::size_t>(p)];
        const std::size_t n = Ym.n;
        std::vector<double> d1(n), d2(n);

        std::vector<double> sups(Ym.M, 0.0);
        for (std::size_t m = 0; m < Ym.M; ++m) {
            double sup = 0.0;
            for (std::size_t k = Ym.k_lo; k <= Ym.k_hi; ++k) {
                const auto ya = Ym.at(m, k);
                const auto yb = Ymp.at(m, k);
                for (std::size_t i = 0; i < n; ++i) {
                    d1[i] = (yb[i] - theta * ya[i]) / (1.0 - theta);
                    d2[i] = (ya[i] - theta * yb[i]) / (1.0 - theta);
                }
                sup = std::max(sup, vec_norm(d1) + vec_norm(d2));
            }
            sups[m] = sup;
        }

        ThetaRow row;
        row.m = iteration_indices[a];
        row.p = p;
        double q_used = q;
        for (;;) {
            double mx = 0.0;
            for (double s : sups) mx = std::max(mx, q_used * gamma * s);
            if (mx < max_arg - 8.0 || q_used < 1e-3) break;
            q_used *= 0.5;
            row.overflow = true;
        }
        row.q_used = q_used;
        double mean_sup = 0.0;
        double mx = 0.0;
        for (double s : sups) mx = std::max(mx, q_used * gamma * s);
        double acc = 0.0;
        for (double s : sups) {
            acc += std::exp(q_used * gamma * s - mx);
            mean_sup += s;
        }
        row.sup_mean = mean_sup / static_cast<double>(sups.size());
        row.log_exp_moment = mx + std::log(acc / static_cast<double>(sups.size()));
        row.exp_moment = row.log_exp_moment < max_arg
                             ? std::exp(row.log_exp_moment)
                             : std::numeric_limits<double>::infinity();
        rep.rows.push_back(row);
    }
    return rep;
}

UniquenessReport uniqueness_probe(const GeneratorModel& model,
                                  std::span<const double> terminal,
                                  const PathEnsemble& ensemble, std::size_t k_lo,
                                  std::size_t k_hi, const PicardOptions& opts,
                                  PicardInit init_a, PicardInit init_b) {
    PicardOptions oa = opts;
    oa.init = init_a;
    PicardOptions ob = opts;
    ob.init = init_b;
    const PicardResult ra = picard_iterate(model, terminal, ensemble, k_lo, k_hi, oa);
    const PicardResult rb = picard_iterate(model, terminal, ensemble, k_lo, k_hi, ob);

    UniquenessReport rep;
    rep.trace_a = ra.trace;
    rep.trace_b = rb.trace;
    rep.both_converged = ra.trace.converged && rb.trace.converged;
    const YField& A = ra.solution.Y;
    const YField& B = rb.solution.Y;
    std::vector<double> diff(A.n);
    for (std::size_t m = 0; m < A.M; ++m)
        for (std::size_t k = A.k_lo; k <= A.k_hi; ++k) {
            const auto a = A.at(m, k);
            const auto b = B.at(m, k);
            for (std::size_t i = 0; i < A.n; ++i) diff[i] = a[i] - b[i];
            double s = 0.0;
            for (double v : diff) s += v * v;
            rep.sup_difference = std::max(rep.sup_difference, std::sqrt(s));
        }
    return rep;
}

} // namespace qbsde
