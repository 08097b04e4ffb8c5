#include "qbsde/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "qbsde/errors.hpp"

namespace qbsde {

GaussHermite gauss_hermite(std::size_t count) {
    if (count < 1) throw ConfigError("quadrature needs at least one node");
    const auto n = static_cast<Eigen::Index>(count);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd subdiag(n > 1 ? n - 1 : 0);
    for (Eigen::Index k = 1; k < n; ++k)
        subdiag[k - 1] = std::sqrt(static_cast<double>(k) / 2.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw SolverError("Gauss-Hermite eigenvalue computation failed");

    GaussHermite rule;
    rule.nodes.resize(count);
    rule.weights.resize(count);
    const double mu0 = std::sqrt(std::numbers::pi); // integral of exp(-u^2)
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

double normal_expectation(const GaussHermite& rule, const std::function<double(double)>& f) {
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    const double sqrt2 = std::numbers::sqrt2;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(sqrt2 * rule.nodes[i]);
    return inv_sqrt_pi * acc;
}

double normal_expectation2(const GaussHermite& rule,
                           const std::function<double(double, double)>& f) {
    const double inv_pi = 1.0 / std::numbers::pi;
    const double sqrt2 = std::numbers::sqrt2;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        for (std::size_t j = 0; j < rule.nodes.size(); ++j)
            acc += rule.weights[i] * rule.weights[j] *
                   f(sqrt2 * rule.nodes[i], sqrt2 * rule.nodes[j]);
    return inv_pi * acc;
}

double checked_normal_expectation(const std::function<double(double)>& f, std::size_t count,
                                  double tol) {
    const double coarse = normal_expectation(gauss_hermite(count), f);
    const double fine = normal_expectation(gauss_hermite(2 * count), f);
    const double scale = std::max({std::fabs(coarse), std::fabs(fine), 1.0});
    if (std::fabs(fine - coarse) > tol * scale)
        throw SolverError("quadrature did not converge: " + std::to_string(coarse) + " vs " +
                          std::to_string(fine) + " at " + std::to_string(count) + "/" +
                          std::to_string(2 * count) + " nodes");
    return fine;
}

namespace {

// 15-point Gauss-Legendre on [-1, 1].
constexpr double kGl15Nodes[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601701,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGl15Weights[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gl15(const std::function<double(double)>& g, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 15; ++i) acc += kGl15Weights[i] * g(mid + half * kGl15Nodes[i]);
    return half * acc;
}

double adaptive_panel(const std::function<double(double)>& g, double a, double b,
                      double whole, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = gl15(g, a, mid);
    const double right = gl15(g, mid, b);
    const double split = left + right;
    if (std::fabs(split - whole) <= tol || depth >= 48) {
        if (depth >= 48 && std::fabs(split - whole) > 1e3 * tol)
            throw SolverError("adaptive quadrature exhausted its refinement budget");
        return split;
    }
    return adaptive_panel(g, a, mid, left, 0.5 * tol, depth + 1) +
           adaptive_panel(g, mid, b, right, 0.5 * tol, depth + 1);
}

} // namespace

double adaptive_normal_expectation(const std::function<double(double)>& f, double tol) {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto g = [&](double x) { return f(x) * inv_sqrt_2pi * std::exp(-0.5 * x * x); };
    // Bisect [-12, 12] into panels first so a central kink cannot hide from
    // the error estimator.
    double total = 0.0;
    for (int p = -12; p < 12; p += 2)
        total += adaptive_panel(g, p, p + 2, gl15(g, p, p + 2), tol / 12.0, 0);
    return total;
}

} // namespace qbsde
