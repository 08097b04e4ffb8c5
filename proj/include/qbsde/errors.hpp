#pragma once

#include <stdexcept>
#include <string>

namespace qbsde {

// Configuration / input errors (CLI exit code 4).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Resource budget exceeded (memory, grid too coarse, ...).
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure inside a solver (divergence, rank collapse that cannot
// be recovered, quadrature non-convergence).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qbsde
