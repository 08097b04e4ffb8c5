#pragma once

#include "qbsde/bounds.hpp"
#include "qbsde/picard.hpp"

namespace qbsde {

// Backward partition of the grid into intervals of length at most eps, every
// boundary snapped to a grid node (intervals may be shorter, never longer).
struct StitchPlan {
    std::vector<std::size_t> boundaries; // node indices, descending, N ... 0
    double eps = 0.0;

    std::size_t intervals() const { return boundaries.size() - 1; }
};

StitchPlan make_plan(const TimeGrid& grid, double eps);

struct IntervalAudit {
    std::size_t index = 0; // 1-based, backward from the terminal
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
    double measured_sup = 0.0; // sup |Y| over the interval, vector norm
    double boundary_sup = 0.0; // sup |Y| at the interval's terminal node
    double recursion_rhs = 0.0; // 2n (boundary_sup + C2), the one-step pattern
    IterationTrace trace;
};

struct GlobalSolveResult {
    BsdeSolution solution;
    std::vector<IntervalAudit> intervals;
    bool converged = false;
    std::size_t failed_interval = 0; // 1-based; 0 when everything converged
    double seam_max_diff = 0.0;      // exact 0 by construction, asserted
};

// Iterates the local solves backward over the plan, feeding each interval
// the per-path Y field at its right boundary, and concatenates the fields.
GlobalSolveResult solve_global(const GeneratorModel& model,
                               std::span<const double> terminal,
                               const PathEnsemble& ensemble, const StitchPlan& plan,
                               const PicardOptions& opts);

// Measured solution statistics against the interval-recursion and Gronwall
// bounds for the same constants.
struct BoundAudit {
    double measured_sup = 0.0;
    std::vector<double> per_component_sup;
    double interval_bound = 0.0;
    bool interval_bound_overflow = false;
    double gronwall = 0.0;
    double margin_interval = 0.0;  // bound - measured
    double margin_gronwall = 0.0; // bound - measured
};
BoundAudit bound_audit(const BsdeSolution& solution, const StructuralConstants& c,
                       bounds::Variant variant);

} // namespace qbsde
