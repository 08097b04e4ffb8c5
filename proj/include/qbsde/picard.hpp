#pragma once

#include <functional>
#include <vector>

#include "qbsde/fields.hpp"
#include "qbsde/generator.hpp"
#include "qbsde/paths.hpp"
#include "qbsde/scalar_solver.hpp"

namespace qbsde {

// Discrete (Y, Z) in R^n x R^{n x d} with per-component solver diagnostics.
struct BsdeSolution {
    YField Y;
    ZField Z;
    std::vector<std::vector<StepDiagnostics>> component_steps;
    double z_clip_used = 0.0;
};

struct IterationRecord {
    int m = 0;
    double dY = 0.0;    // sup over paths/nodes of |Y^(m) - Y^(m-1)|
    double dZ = 0.0;    // Monte-Carlo H^2 norm of the Z difference
    double ratio = 0.0; // dY_m / dY_{m-1}
    double seconds = 0.0;
};

struct IterationTrace {
    std::vector<IterationRecord> records;
    bool converged = false;
    bool diverged = false;
    std::string note;
};

enum class PicardMode {
    FrozenY,  // recursion with the previous Y iterate frozen (needs diagonal g)
    FrozenYV, // decoupled map with both (U, V) frozen and row substitution
};

enum class PicardInit { Zero, TerminalFlat };

struct PicardOptions {
    SolverOptions solver;
    PicardMode mode = PicardMode::FrozenY;
    int max_iters = 30;
    double tol = 1e-4;
    PicardInit init = PicardInit::Zero;
    int window = 0; // retained full Y iterates for the theta monitor
    bool derive_certificates = true;
    bool allow_nondiagonal_frozen_y = false;
    std::function<void(int, const YField&, const ZField&)> observer;
};

// One application of the decoupled solution map: component i solves the
// scalar BSDE with driver z -> g^i(t, U_t, V_t(z; i)) and terminal xi^i.
// terminal is row-major M x n.
BsdeSolution gamma_map(const GeneratorModel& model, const YField& U, const ZField& V,
                       std::span<const double> terminal, const PathEnsemble& ensemble,
                       std::size_t k_lo, std::size_t k_hi, const SolverOptions& opts,
                       bool derive_certificates = true);

struct PicardResult {
    BsdeSolution solution;
    IterationTrace trace;
    std::vector<YField> window;       // retained Y iterates, oldest first
    std::vector<int> window_indices;  // iteration number of each retained field
};

// Repeats the decoupled map from (Y, Z) = (0, 0) (or the terminal propagated
// flat) until the sup-difference falls under tol, divergence is detected
// (three consecutive increases of dY), or max_iters runs out.
PicardResult picard_iterate(const GeneratorModel& model, std::span<const double> terminal,
                            const PathEnsemble& ensemble, std::size_t k_lo,
                            std::size_t k_hi, const PicardOptions& opts);

// theta-difference monitor: for stored iterates Y^(m), Y^(m+p) computes
// delta_theta Y = (Y^(m+p) - theta Y^(m))/(1-theta) and its mirrored twin,
// the per-path sup of |dY| + |dYtilde|, and the empirical exponential moment
// E[exp(q gamma sup)]. Overflow halves q and records the reduction.
struct ThetaRow {
    int m = 0;
    int p = 0;
    double q_used = 0.0;
    double log_exp_moment = 0.0;
    double exp_moment = 0.0;
    bool overflow = false;
    double sup_mean = 0.0;
};
struct ThetaReport {
    double theta = 0.0;
    double q = 0.0;
    std::vector<ThetaRow> rows;
};
ThetaReport theta_monitor(const std::vector<YField>& iterates,
                          const std::vector<int>& iteration_indices, double theta, double q,
                          double gamma, int p = 1);

// Runs the iteration from two initial iterates and reports the sup-distance
// of the converged fields. The probe reports; it never asserts.
struct UniquenessReport {
    double sup_difference = 0.0;
    IterationTrace trace_a;
    IterationTrace trace_b;
    bool both_converged = false;
};
UniquenessReport uniqueness_probe(const GeneratorModel& model,
                                  std::span<const double> terminal,
                                  const PathEnsemble& ensemble, std::size_t k_lo,
                                  std::size_t k_hi, const PicardOptions& opts,
                                  PicardInit init_a, PicardInit init_b);

} // namespace qbsde
