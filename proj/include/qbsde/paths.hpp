#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qbsde/errors.hpp"

namespace qbsde {

// Uniform grid t_k = k T / N, k = 0..N.
struct TimeGrid {
    double T = 1.0;
    std::size_t N = 1;

    double dt() const { return T / static_cast<double>(N); }
    double node(std::size_t k) const {
        return T * static_cast<double>(k) / static_cast<double>(N);
    }
};

// M simulated d-dimensional Brownian paths on the grid, dense in memory,
// immutable after creation. values are laid out path-major: [m][k][j].
class PathEnsemble {
public:
    PathEnsemble() = default;
    PathEnsemble(TimeGrid grid, std::size_t M, std::size_t d, std::uint64_t seed,
                 std::vector<double> values)
        : grid_(grid), M_(M), d_(d), seed_(seed), values_(std::move(values)) {}

    const TimeGrid& grid() const { return grid_; }
    std::size_t paths() const { return M_; }
    std::size_t dim() const { return d_; }
    std::uint64_t seed() const { return seed_; }

    std::span<const double> state(std::size_t m, std::size_t k) const {
        return {values_.data() + (m * (grid_.N + 1) + k) * d_, d_};
    }
    // Increment B[m][k+1] - B[m][k], coordinate j.
    double increment(std::size_t m, std::size_t k, std::size_t j) const {
        const std::size_t base = (m * (grid_.N + 1) + k) * d_ + j;
        return values_[base + d_] - values_[base];
    }
    const std::vector<double>& raw() const { return values_; }

private:
    TimeGrid grid_;
    std::size_t M_ = 0;
    std::size_t d_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> values_;
};

// Memory budget for dense ensembles; QBSDE_MEMORY_BUDGET_MB overrides.
std::size_t memory_budget_bytes();

// Gaussian increments of variance T/N per coordinate, keyed on
// (seed, path, step, coordinate): any path is reconstructible on its own and
// the result does not depend on the worker count.
PathEnsemble simulate(std::uint64_t seed, std::size_t M, std::size_t N, double T,
                      std::size_t d);

// Pathwise negation (an involution).
PathEnsemble antithetic(const PathEnsemble& e);

// Concatenation of two ensembles on the same grid.
PathEnsemble merge(const PathEnsemble& a, const PathEnsemble& b);

// M/2 fresh paths plus their negations: the union has exactly-zero odd
// sample moments. M must be even.
PathEnsemble simulate_antithetic(std::uint64_t seed, std::size_t M, std::size_t N, double T,
                                 std::size_t d);

// The same Brownian paths read on every factor-th node (N must be divisible
// by factor). Used by convergence studies with common random numbers.
PathEnsemble coarsen(const PathEnsemble& e, std::size_t factor);

// Binary dump for experiment reproducibility. Header: magic, version, seed,
// M, N, d as 64-bit little-endian integers, T as a 64-bit float; payload:
// row-major 64-bit floats.
void save_ensemble(const PathEnsemble& e, const std::string& path);
PathEnsemble load_ensemble(const std::string& path);

} // namespace qbsde
