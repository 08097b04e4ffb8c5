#include "qbsde/oracle.hpp"

#include <cmath>

#include "qbsde/errors.hpp"

namespace qbsde {

double cole_hopf_value(double gamma, const std::function<double(double)>& h, double T,
                       std::size_t quad_nodes) {
    if (gamma == 0.0) throw ConfigError("cole_hopf_value needs gamma != 0");
    const double sqrtT = std::sqrt(T);
    auto integrand = [&](double x) { return std::exp(gamma * h(sqrtT * x)); };
    double value;
    try {
        value = checked_normal_expectation(integrand, quad_nodes);
    } catch (const SolverError&) {
        // Hermite rules stall on kinked terminals (clamps); refine adaptively
        // and keep the same self-consistency contract.
        const double v1 = adaptive_normal_expectation(integrand, 1e-12);
        const double v2 = adaptive_normal_expectation(integrand, 1e-13);
        if (std::fabs(v1 - v2) > 1e-10 * std::max({std::fabs(v1), std::fabs(v2), 1.0}))
            throw SolverError("adaptive quadrature did not self-verify for this terminal");
        value = v2;
    }
    return std::log(value) / gamma;
}

OracleCase pure_quadratic_case(const std::vector<double>& gammas,
                               const std::vector<int>& signs,
                               const std::vector<std::function<double(double)>>& h, double T,
                               std::size_t quad_nodes) {
    if (gammas.size() != signs.size() || gammas.size() != h.size())
        throw ConfigError("pure_quadratic_case needs matching component lists");
    OracleCase oc;
    oc.name = "pure_quadratic";
    oc.method = "exponential transform, Gauss-Hermite";
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        const double s = signs[i] >= 0 ? 1.0 : -1.0;
        oc.y0.push_back(cole_hopf_value(s * gammas[i], h[i], T, quad_nodes));
    }
    return oc;
}

OracleCase linear_case(const std::vector<double>& mu, double c,
                       const std::function<double(std::span<const double>)>& h, double T,
                       std::size_t quad_nodes) {
    OracleCase oc;
    oc.name = "linear";
    oc.method = "Girsanov shift, Gauss-Hermite";
    const double sqrtT = std::sqrt(T);
    if (mu.size() == 1) {
        const double value = checked_normal_expectation(
            [&](double x) {
                const double b = sqrtT * x + mu[0] * T;
                return h(std::span<const double>(&b, 1));
            },
            quad_nodes);
        oc.y0.push_back(value + c * T);
    } else if (mu.size() == 2) {
        const GaussHermite coarse = gauss_hermite(quad_nodes);
        const GaussHermite fine = gauss_hermite(2 * quad_nodes);
        auto eval = [&](const GaussHermite& rule) {
            return normal_expectation2(rule, [&](double x1, double x2) {
                const double b[2] = {sqrtT * x1 + mu[0] * T, sqrtT * x2 + mu[1] * T};
                return h(std::span<const double>(b, 2));
            });
        };
        const double a = eval(coarse), b = eval(fine);
        if (std::fabs(a - b) > 1e-10 * std::max({std::fabs(a), std::fabs(b), 1.0}))
            throw SolverError("tensor quadrature did not converge");
        oc.y0.push_back(b + c * T);
    } else {
        throw ConfigError("linear_case oracles are limited to d <= 2");
    }
    return oc;
}

OracleCase deterministic_ode_case(double beta, const std::vector<double>& terminal,
                                  double T) {
    OracleCase oc;
    oc.name = "deterministic_ode";
    oc.method = "linear ODE dY/dt = -beta Y";
    for (double ci : terminal) oc.y0.push_back(ci * std::exp(beta * T));
    return oc;
}

} // namespace qbsde
