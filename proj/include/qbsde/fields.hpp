#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qbsde {

// Discrete R^n-valued field indexed by (path, node) on a node window
// [k_lo, k_hi] of the global grid.
struct YField {
    std::size_t M = 0;
    std::size_t n = 0;
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
    std::vector<double> v; // [m][kw][i]

    static YField zeros(std::size_t M, std::size_t n, std::size_t k_lo, std::size_t k_hi) {
        YField f;
        f.M = M;
        f.n = n;
        f.k_lo = k_lo;
        f.k_hi = k_hi;
        f.v.assign(M * (k_hi - k_lo + 1) * n, 0.0);
        return f;
    }

    std::size_t window_nodes() const { return k_hi - k_lo + 1; }
    std::span<const double> at(std::size_t m, std::size_t k) const {
        return {v.data() + (m * window_nodes() + (k - k_lo)) * n, n};
    }
    std::span<double> at(std::size_t m, std::size_t k) {
        return {v.data() + (m * window_nodes() + (k - k_lo)) * n, n};
    }
};

// Discrete R^{n x d}-valued field (rows stored contiguously).
struct ZField {
    std::size_t M = 0;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t k_lo = 0;
    std::size_t k_hi = 0;
    std::vector<double> v; // [m][kw][i][j]

    static ZField zeros(std::size_t M, std::size_t n, std::size_t d, std::size_t k_lo,
                        std::size_t k_hi) {
        ZField f;
        f.M = M;
        f.n = n;
        f.d = d;
        f.k_lo = k_lo;
        f.k_hi = k_hi;
        f.v.assign(M * (k_hi - k_lo + 1) * n * d, 0.0);
        return f;
    }

    std::size_t window_nodes() const { return k_hi - k_lo + 1; }
    std::span<const double> matrix(std::size_t m, std::size_t k) const {
        return {v.data() + (m * window_nodes() + (k - k_lo)) * n * d, n * d};
    }
    std::span<double> matrix(std::size_t m, std::size_t k) {
        return {v.data() + (m * window_nodes() + (k - k_lo)) * n * d, n * d};
    }
    std::span<const double> row(std::size_t m, std::size_t k, std::size_t i) const {
        return matrix(m, k).subspan(i * d, d);
    }
    std::span<double> row(std::size_t m, std::size_t k, std::size_t i) {
        return matrix(m, k).subspan(i * d, d);
    }
};

} // namespace qbsde
