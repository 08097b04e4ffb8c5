#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qbsde/paths.hpp"
#include "qbsde/regression.hpp"
#include "qbsde/structural.hpp"

namespace qbsde {

struct SolverOptions {
    int basis_degree = 4;
    int inner_iters = 3;                 // implicit driver fixed point per step
    std::optional<double> z_clip;        // row-norm truncation; see default below
    double divergence_factor = 10.0;     // abort when sup|Y| exceeds factor * bound
};

// One-dimensional driver f(t, ., z) on the ensemble: the path index carries
// whatever frozen processes were substituted into the generator. The
// certificate fields feed the default truncation level and the divergence
// guard; leave them empty when no bound is known.
struct ScalarDriver {
    std::function<double(std::size_t k, std::size_t m, std::span<const double> z)> f;
    double gamma = 1.0;
    std::optional<double> eta_sup;
    std::optional<double> alpha_tilde_integral; // bound on the alpha-like budget
    std::optional<double> y_sup_bound;          // a priori sup bound when available
    std::optional<double> bmo_sq_bound;         // a priori BMO^2 bound when available
};

struct StepDiagnostics {
    std::size_t k = 0;
    double residual_rms = 0.0;
    long rank = 0;
    std::size_t dropped_columns = 0;
    std::size_t clipped = 0;
};

// Discrete (Y, Z) on the node window [k_lo, k_hi]. Y stores window_nodes()
// values per path; Z stores a 1 x d row per (path, node), zero at the last.
struct ScalarSolution {
    std::size_t M = 0;
    std::size_t d = 0;
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
    std::vector<double> Y;
    std::vector<double> Z;
    std::vector<StepDiagnostics> steps;
    double z_clip_used = 0.0;

    std::size_t window_nodes() const { return k_hi - k_lo + 1; }
    double y(std::size_t m, std::size_t k) const { return Y[m * window_nodes() + (k - k_lo)]; }
    double& y(std::size_t m, std::size_t k) { return Y[m * window_nodes() + (k - k_lo)]; }
    std::span<const double> z(std::size_t m, std::size_t k) const {
        return {Z.data() + (m * window_nodes() + (k - k_lo)) * d, d};
    }
    std::span<double> z(std::size_t m, std::size_t k) {
        return {Z.data() + (m * window_nodes() + (k - k_lo)) * d, d};
    }
};

// Backward least-squares induction for the scalar quadratic BSDE on
// [t_{k_lo}, t_{k_hi}] with per-path terminal values. Each step fits
// E[Y_{k+1} | B_k] once, estimates Z from the centered martingale increment,
// and re-enters the driver into the Z regression inner_iters times.
ScalarSolution solve_scalar(const ScalarDriver& driver, std::span<const double> terminal,
                            const PathEnsemble& ensemble, std::size_t k_lo, std::size_t k_hi,
                            const SolverOptions& opts = {});

// Sup-norm bound for the scalar solution: (1/gamma) ln 2 + |eta| + C2 +
// phi(U_sup)(T-t) + gamma^((1+d)/(1-d)) C_dln V_bmo^(2(1+d)/(1-d)) (T-t).
double apriori_sup_bound(const StructuralConstants& c, double eta_sup, double U_sup, double V_bmo,
                  double t);

// Conditional quadratic-variation (BMO^2) bound. Overflow is flagged, not
// propagated as inf.
struct AprioriBmo {
    double value = 0.0;
    bool overflow = false;
};
AprioriBmo apriori_bmo_bound(const StructuralConstants& c, double eta_sup, double U_sup,
                     double V_bmo, double Y_sup, double t);

enum class SignMode { Absolute, PositivePart };

// Regression estimate of the conditional-expectation bound
//   exp(gamma |Y_t|) <= E_t[exp(gamma |eta| + gamma int_t^T alpha_bar ds)]
// (or the positive-part variant). alpha_tail[m * W + kw] holds the per-path
// Riemann tail integral of alpha_bar from t_k to t_{k_hi}. Returns the bound
// on |Y| (resp. Y^+) per path and node, floored at zero.
std::vector<double> apriori_exponential_bound(double gamma, const PathEnsemble& ensemble,
                                              std::size_t k_lo, std::size_t k_hi,
                                              std::span<const double> eta,
                                              std::span<const double> alpha_tail,
                                              SignMode mode, int basis_degree = 4);

struct BudgetParams {
    double gamma = 1.0;
    double gamma_bar = 1.0;
    double beta = 0.0;
    double lambda = 0.0;
    double delta = 0.0;
    double eta_sup = 0.0;       // ||eta||_inf
    double alpha_int_sup = 0.0; // ||int_0^T alpha dt||_inf
    double U_sup = 0.0;         // ||U||_Sinf of the frozen process
};

// Mode (i): per-path per-node upper bound on |Y_t| from
//   exp(gamma|Y_t|) <= E_t[exp(gamma eta_sup + gamma alpha_int_sup +
//                              beta gamma U_sup (T-t) + lambda gamma int |V|^(1+delta))].
// vnorm (nullable) holds |V_t| per path/node on the window.
std::vector<double> exp_sup_bound(const BudgetParams& p, const PathEnsemble& ensemble,
                                    std::size_t k_lo, std::size_t k_hi,
                                    std::span<const double> vnorm, int basis_degree = 4);

// Mode (ii): both sides of the exponential quadratic-variation bound for
// eps in (0, gamma_bar/9]: lhs_t = E_t[exp((gamma_bar/2) eps int_t^T |Z|^2)]
// per path/node (regression estimate); rhs the displayed deterministic bound
// with Y_sup measured on the ensemble.
struct ExpQvBound {
    std::vector<double> lhs; // per path per node
    double rhs = 0.0;
};
ExpQvBound exp_qv_bound(const BudgetParams& p, double eps,
                               const PathEnsemble& ensemble, const ScalarSolution& sol,
                               double y_sup_measured, std::span<const double> vnorm,
                               int basis_degree = 4);

} // namespace qbsde
