#pragma once

#include <string>

#include "qbsde/fields.hpp"
#include "qbsde/paths.hpp"
#include "qbsde/scalar_solver.hpp"

namespace qbsde::norms {

// An estimated process norm. Stopping-time suprema are approximated by
// grid-node suprema and essential suprema by ensemble maxima; both
// under-estimate, which `note` records. Overflowing exponential moments are
// reported in log space with `overflow` set.
struct NormEstimate {
    std::string name;
    double value = 0.0;
    double log_value = 0.0;
    bool overflow = false;
    std::string note;
};

// max over paths and nodes of the Euclidean norm |Y[m][k]|.
double s_inf(const YField& y);

// (mean over paths of sup_k |Y[m][k]|^p)^(1/p).
double s_p(const YField& y, double p);

// (mean over paths of (sum_k |Z[m][k]|^2 dt)^(p/2))^(1/p), Frobenius rows.
double h_p(const ZField& z, double dt, double p);

// Grid-node BMO estimate: max over nodes of the ensemble max of the fitted
// conditional tail quadratic variation, square-rooted.
NormEstimate bmo(const ZField& z, const PathEnsemble& ensemble, std::size_t k_lo,
                 std::size_t k_hi, int basis_degree = 4);

// Monte-Carlo mean of exp(p * gamma * sup_k |field[m][k]|), computed in log
// space so that blown-up weights stay comparable.
NormEstimate exp_moment(const YField& y, double p, double gamma);

// Same for a flat sample vector (terminal values, alpha integrals).
NormEstimate exp_moment_samples(std::span<const double> samples, double weight);

// View conversions from the scalar solver's solution (n = 1).
YField yfield_of(const ScalarSolution& s);
ZField zfield_of(const ScalarSolution& s);

} // namespace qbsde::norms
