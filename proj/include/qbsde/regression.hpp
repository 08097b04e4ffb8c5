#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qbsde/paths.hpp"

namespace qbsde {

// Global polynomial basis on the d-dimensional Brownian state. For d <= 2
// all monomials of total degree <= degree; for d > 2 an additive basis per
// coordinate plus pairwise first-order products.
class PolyBasis {
public:
    PolyBasis(std::size_t d, int degree);

    std::size_t count() const { return exponents_.size(); }
    std::size_t dim() const { return d_; }
    int degree() const { return degree_; }

    // Writes the basis row for one (already scaled) point.
    void row(std::span<const double> x, std::span<double> out) const;

private:
    std::size_t d_;
    int degree_;
    std::vector<std::vector<int>> exponents_; // per column, per coordinate
};

struct RegressionDiagnostics {
    long rank = 0;
    std::size_t dropped_columns = 0;
    double residual_rms = 0.0;
};

// Least-squares conditional expectation at one grid node: a rank-revealing
// column-pivoted QR of the basis design matrix, factored once, solved per
// target. Columns whose pivots fall below 1e-10 of the largest are dropped.
// Coordinates are scaled by sqrt(max(t_k, dt)) before basis evaluation.
class NodeRegression {
public:
    NodeRegression(const PathEnsemble& e, std::size_t k, int degree);
    ~NodeRegression();
    NodeRegression(NodeRegression&&) noexcept;
    NodeRegression& operator=(NodeRegression&&) noexcept;

    std::size_t paths() const;

    // Fitted values of E[target | B_{t_k}] per path.
    std::vector<double> fit(std::span<const double> target,
                            RegressionDiagnostics* diag = nullptr) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace qbsde
