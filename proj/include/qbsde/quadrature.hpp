#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qbsde {

// Gauss-Hermite rule for weight exp(-u^2) via the Golub-Welsch eigenvalue
// construction.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussHermite gauss_hermite(std::size_t count);

// E[f(X)] for X ~ N(0, 1).
double normal_expectation(const GaussHermite& rule, const std::function<double(double)>& f);

// E[f(X1, X2)] for independent standard normals, tensorized rule.
double normal_expectation2(const GaussHermite& rule,
                           const std::function<double(double, double)>& f);

// Convergence-checked expectation: evaluates at `count` and `2*count` nodes
// and throws SolverError when the two disagree beyond `tol` (relative, with
// an absolute floor).
double checked_normal_expectation(const std::function<double(double)>& f,
                                  std::size_t count = 200, double tol = 1e-10);

// E[f(X)] by adaptive bisected Gauss-Legendre panels on [-12, 12] (phi
// weight included). Converges on merely piecewise-smooth integrands such as
// clamped payoffs, where a global Hermite rule stalls. Throws SolverError
// when the refinement budget is exhausted.
double adaptive_normal_expectation(const std::function<double(double)>& f,
                                   double tol = 1e-12);

} // namespace qbsde
