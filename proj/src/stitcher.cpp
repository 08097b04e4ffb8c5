#include "qbsde/stitcher.hpp"

#include <algorithm>
#include <cmath>

namespace qbsde {

namespace {

double vec_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

StitchPlan make_plan(const TimeGrid& grid, double eps) {
    if (!(eps > 0.0)) throw ConfigError("plan needs eps > 0");
    StitchPlan plan;
    plan.eps = eps;

    const double dt = grid.dt();
    // Snap to the node count just under eps; the small nudge keeps an exact
    // multiple like eps = T/3 on a divisible grid from rounding down a node.
    const auto step = static_cast<std::size_t>(std::floor(eps / dt + 1e-9));
    if (step == 0)
        throw ResourceError("grid too coarse to resolve eps = " + std::to_string(eps) +
                            "; increase N above " + std::to_string(grid.T / eps));

    plan.boundaries.push_back(grid.N);
    while (plan.boundaries.back() > 0) {
        const std::size_t cur = plan.boundaries.back();
        plan.boundaries.push_back(cur > step ? cur - step : 0);
    }
    return plan;
}

GlobalSolveResult solve_global(const GeneratorModel& model,
                               std::span<const double> terminal,
                               const PathEnsemble& ensemble, const StitchPlan& plan,
                               const PicardOptions& opts) {
    const auto n = static_cast<std::size_t>(model.constants.n);
    const auto d = static_cast<std::size_t>(model.constants.d);
    const std::size_t M = ensemble.paths();
    if (plan.boundaries.size() < 2 || plan.boundaries.front() != ensemble.grid().N ||
        plan.boundaries.back() != 0)
        throw ConfigError("plan must cover [0, T] on this grid");

    GlobalSolveResult res;
    res.solution.Y = YField::zeros(M, n, 0, ensemble.grid().N);
    res.solution.Z = ZField::zeros(M, n, d, 0, ensemble.grid().N);

    std::vector<double> interval_terminal(terminal.begin(), terminal.end());
    res.converged = true;

    for (std::size_t j = 1; j < plan.boundaries.size(); ++j) {
        const std::size_t k_hi = plan.boundaries[j - 1];
        const std::size_t k_lo = plan.boundaries[j];

        const PicardResult local =
            picard_iterate(model, interval_terminal, ensemble, k_lo, k_hi, opts);

        IntervalAudit audit;
        audit.index = j;
        audit.k_lo = k_lo;
        audit.k_hi = k_hi;
        audit.trace = local.trace;
        for (std::size_t m = 0; m < M; ++m) {
            audit.boundary_sup =
                std::max(audit.boundary_sup, vec_norm(local.solution.Y.at(m, k_hi)));
            for (std::size_t k = k_lo; k <= k_hi; ++k)
                audit.measured_sup =
                    std::max(audit.measured_sup, vec_norm(local.solution.Y.at(m, k)));
        }
        audit.recursion_rhs =
            2.0 * static_cast<double>(n) * (audit.boundary_sup + model.constants.C2);

        // Seam: the local solver keeps its terminal exactly, so the value at
        // k_hi must agree with what interval j-1 wrote there.
        if (j > 1) {
            for (std::size_t m = 0; m < M; ++m) {
                const auto a = res.solution.Y.at(m, k_hi);
                const auto b = local.solution.Y.at(m, k_hi);
                for (std::size_t i = 0; i < n; ++i)
                    res.seam_max_diff =
                        std::max(res.seam_max_diff, std::fabs(a[i] - b[i]));
            }
        }

        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t k = k_lo; k <= k_hi; ++k) {
                const auto ys = local.solution.Y.at(m, k);
                const auto yd = res.solution.Y.at(m, k);
                std::copy(ys.begin(), ys.end(), yd.begin());
                const auto zs = local.solution.Z.matrix(m, k);
                const auto zd = res.solution.Z.matrix(m, k);
                std::copy(zs.begin(), zs.end(), zd.begin());
            }
        res.solution.z_clip_used = local.solution.z_clip_used;
        res.intervals.push_back(std::move(audit));

        if (!local.trace.converged) {
            res.converged = false;
            res.failed_interval = j;
            break;
        }

        for (std::size_t m = 0; m < M; ++m) {
            const auto y = local.solution.Y.at(m, k_lo);
            for (std::size_t i = 0; i < n; ++i) interval_terminal[m * n + i] = y[i];
        }
    }
    return res;
}

BoundAudit bound_audit(const BsdeSolution& solution, const StructuralConstants& c,
                       bounds::Variant variant) {
    BoundAudit audit;
    const YField& Y = solution.Y;
    audit.per_component_sup.assign(Y.n, 0.0);
    for (std::size_t m = 0; m < Y.M; ++m)
        for (std::size_t k = Y.k_lo; k <= Y.k_hi; ++k) {
            const auto y = Y.at(m, k);
            audit.measured_sup = std::max(audit.measured_sup, vec_norm(y));
            for (std::size_t i = 0; i < Y.n; ++i)
                audit.per_component_sup[i] =
                    std::max(audit.per_component_sup[i], std::fabs(y[i]));
        }
    const bounds::GlobalBound g = bounds::interval_recursion_bound(c, variant);
    audit.interval_bound = g.bound;
    audit.interval_bound_overflow = g.overflow;
    audit.gronwall = bounds::gronwall_bound(c, variant);
    audit.margin_interval = audit.interval_bound - audit.measured_sup;
    audit.margin_gronwall = audit.gronwall - audit.measured_sup;
    return audit;
}

} // namespace qbsde
