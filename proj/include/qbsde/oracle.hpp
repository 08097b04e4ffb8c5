#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qbsde/quadrature.hpp"

namespace qbsde {

// A closed-form or quadrature reference value for Y_0, independent of the
// Monte-Carlo solver path.
struct OracleCase {
    std::string name;
    std::vector<double> y0;
    std::string method;
};

// Y_0 for the scalar pure-quadratic driver f = (gamma/2)|z|^2 with terminal
// h(B_T), d = 1: the exponential transform (1/gamma) ln E[exp(gamma h(sqrt(T) X))].
double cole_hopf_value(double gamma, const std::function<double(double)>& h, double T,
                       std::size_t quad_nodes = 200);

// Diagonal model g^i = s_i (gamma_i/2)|z^i|^2 with per-component terminal
// h_i(B_T), d = 1. s_i = +1 for the convex component, -1 for the concave one;
// Y_0^i = (s_i/gamma_i) ln E[exp(s_i gamma_i h_i(B_T))].
OracleCase pure_quadratic_case(const std::vector<double>& gammas,
                               const std::vector<int>& signs,
                               const std::vector<std::function<double(double)>>& h, double T,
                               std::size_t quad_nodes = 200);

// f(t, z) = mu . z^T + c with terminal h(B_T) of polynomial growth:
// Y_0 = E[h(B_T + mu T)] + c T. d = 1 or 2 (tensor quadrature).
OracleCase linear_case(const std::vector<double>& mu, double c,
                       const std::function<double(std::span<const double>)>& h, double T,
                       std::size_t quad_nodes = 200);

// g^i = beta y^i with constant terminal c: Y_t^i = c_i exp(beta (T - t)), Z = 0.
OracleCase deterministic_ode_case(double beta, const std::vector<double>& terminal,
                                  double T);

} // namespace qbsde
