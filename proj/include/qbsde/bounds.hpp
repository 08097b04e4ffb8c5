#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "qbsde/structural.hpp"

namespace qbsde::bounds {

// Greatest integer <= x, including integer x itself.
long long floor_int(double x);

enum class Variant { I, II };

// ((1-delta)/2) * (1+delta)^((1+delta)/(1-delta)) * (n*lambda)^(2/(1-delta))
double c_delta_lambda_n(double delta, double lambda, int n);

// Radii of the stable ball for the local fixed point, and the admissible
// interval length eps0. eps0_unbounded marks the degenerate case where both
// quotient denominators vanish (phi(2K1) = 0 and lambda = 0): any eps <= T
// is admissible.
struct LocalRadii {
    double k1 = 0.0;
    double k2 = 0.0;
    double eps0 = 0.0;
    bool overflow = false;
    bool eps0_unbounded = false;
};
LocalRadii local_radii(const StructuralConstants& c);

// Interval length eps = 1/(2 n beta) and interval count m0 with
// T/eps <= m0 < T/eps + 1. beta = 0 collapses to a single interval.
struct StitchStep {
    double eps = 0.0;
    long long m0 = 1;
    bool single_interval = false;
};
StitchStep stitch_step(const StructuralConstants& c);

// Global sup-norm bound obtained by iterating the one-interval estimate.
struct GlobalBound {
    double bound = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double c5 = 0.0;
    double eps0_prime = 0.0; // min(gamma_bar/9, gamma/(12(beta T + 2)))
    bool overflow = false;
};
GlobalBound interval_recursion_bound(const StructuralConstants& c, Variant v);

// The sharper Gronwall version of the same bounds.
double gronwall_bound(const StructuralConstants& c, Variant v);

// A(q) = (q/(q-1))^(2q) and the decomposition of K(q): a plain coefficient
// plus the exponent weights that multiply |xi| and the alpha integral inside
// the two expectations (which are data-dependent and estimated elsewhere).
struct ExpMomentConstants {
    double a_q = 0.0;
    double coefficient = 0.0;
    double xi_weight = 0.0;
    double alpha_weight = 0.0;
};
ExpMomentConstants exp_moment_constants(const StructuralConstants& c, double q);

// a*b^(1+delta) <= b^2 + ((1-delta)/2)((1+delta)/2)^((1+delta)/(1-delta)) a^(2/(1-delta))
struct YoungSplit {
    double bound = 0.0;
    double lhs = 0.0;
};
YoungSplit young_split(double a, double b, double delta);

// eps_bar = 1/(8 n beta); beta = 0 means uniqueness holds without splitting.
struct UniquenessStep {
    double eps_bar = 0.0;
    bool global = false;
};
UniquenessStep uniqueness_step(const StructuralConstants& c);

// Flat named report of every bound for the CLI. Status is "ok", "overflow"
// (parameters outside desk scale), "unbounded" or "n/a".
struct BoundEntry {
    double value = 0.0;
    std::string status = "ok";
};
struct BoundReport {
    std::map<std::string, BoundEntry> entries;
};
BoundReport bound_report(const StructuralConstants& c, double q);

} // namespace qbsde::bounds
