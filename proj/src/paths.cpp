#include "qbsde/paths.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "qbsde/parallel.hpp"
#include "qbsde/rng.hpp"

namespace qbsde {

std::size_t memory_budget_bytes() {
    if (const char* env = std::getenv("QBSDE_MEMORY_BUDGET_MB")) {
        const long mb = std::atol(env);
        if (mb > 0) return static_cast<std::size_t>(mb) * 1024 * 1024;
    }
    return std::size_t{4096} * 1024 * 1024; // 4 GiB default
}

namespace {

void check_budget(std::size_t M, std::size_t N, std::size_t d) {
    const std::size_t doubles = M * (N + 1) * d;
    if (doubles * sizeof(double) > memory_budget_bytes())
        throw ResourceError("ensemble of " + std::to_string(doubles) +
                            " values exceeds the memory budget; raise "
                            "QBSDE_MEMORY_BUDGET_MB or shrink M*N*d");
}

} // namespace

PathEnsemble simulate(std::uint64_t seed, std::size_t M, std::size_t N, double T,
                      std::size_t d) {
    if (M < 1 || N < 1 || d < 1 || !(T > 0.0))
        throw ConfigError("simulate requires M, N, d >= 1 and T > 0");
    check_budget(M, N, d);

    const TimeGrid grid{T, N};
    std::vector<double> values(M * (N + 1) * d);
    const double step = std::sqrt(grid.dt());

    parallel_chunks(M, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t m = lo; m < hi; ++m) {
            double* path = values.data() + m * (N + 1) * d;
            for (std::size_t j = 0; j < d; ++j) path[j] = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                const double* prev = path + k * d;
                double* next = path + (k + 1) * d;
                for (std::size_t j = 0; j < d; ++j)
                    next[j] = prev[j] + step * rng::normal(seed, m, k * d + j);
            }
        }
    });
    return PathEnsemble(grid, M, d, seed, std::move(values));
}

PathEnsemble antithetic(const PathEnsemble& e) {
    std::vector<double> values(e.raw().size());
    parallel_chunks(values.size(), [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) values[i] = -e.raw()[i];
    });
    return PathEnsemble(e.grid(), e.paths(), e.dim(), e.seed(), std::move(values));
}

PathEnsemble merge(const PathEnsemble& a, const PathEnsemble& b) {
    if (a.grid().N != b.grid().N || a.grid().T != b.grid().T || a.dim() != b.dim())
        throw ConfigError("merge requires ensembles on identical grids");
    std::vector<double> values;
    values.reserve(a.raw().size() + b.raw().size());
    values.insert(values.end(), a.raw().begin(), a.raw().end());
    values.insert(values.end(), b.raw().begin(), b.raw().end());
    return PathEnsemble(a.grid(), a.paths() + b.paths(), a.dim(), a.seed(),
                        std::move(values));
}

PathEnsemble simulate_antithetic(std::uint64_t seed, std::size_t M, std::size_t N, double T,
                                 std::size_t d) {
    if (M % 2 != 0) throw ConfigError("antithetic ensembles need an even path count");
    const PathEnsemble half = simulate(seed, M / 2, N, T, d);
    return merge(half, antithetic(half));
}

PathEnsemble coarsen(const PathEnsemble& e, std::size_t factor) {
    if (factor < 1 || e.grid().N % factor != 0)
        throw ConfigError("coarsen factor must divide the step count");
    if (factor == 1) return e;
    const std::size_t N = e.grid().N / factor;
    const std::size_t d = e.dim();
    std::vector<double> values(e.paths() * (N + 1) * d);
    parallel_chunks(e.paths(), [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t m = lo; m < hi; ++m) {
            for (std::size_t k = 0; k <= N; ++k) {
                const auto src = e.state(m, k * factor);
                double* dst = values.data() + (m * (N + 1) + k) * d;
                std::memcpy(dst, src.data(), d * sizeof(double));
            }
        }
    });
    return PathEnsemble(TimeGrid{e.grid().T, N}, e.paths(), d, e.seed(), std::move(values));
}

namespace {
constexpr char kMagic[8] = {'Q', 'B', 'S', 'D', 'E', 'P', 'T', 'H'};
constexpr std::uint64_t kVersion = 1;
} // namespace

void save_ensemble(const PathEnsemble& e, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ResourceError("cannot open " + path + " for writing");
    const std::uint64_t header[5] = {kVersion, e.seed(), e.paths(), e.grid().N, e.dim()};
    const double T = e.grid().T;
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(&T), sizeof(T));
    out.write(reinterpret_cast<const char*>(e.raw().data()),
              static_cast<std::streamsize>(e.raw().size() * sizeof(double)));
    if (!out) throw ResourceError("short write to " + path);
}

PathEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResourceError("cannot open " + path);
    char magic[8];
    std::uint64_t header[5];
    double T = 0.0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    in.read(reinterpret_cast<char*>(&T), sizeof(T));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || header[0] != kVersion)
        throw ResourceError(path + " is not a version-" + std::to_string(kVersion) +
                            " ensemble dump");
    const std::uint64_t seed = header[1], M = header[2], N = header[3], d = header[4];
    check_budget(M, N, d);
    std::vector<double> values(M * (N + 1) * d);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw ResourceError("truncated ensemble dump " + path);
    return PathEnsemble(TimeGrid{T, N}, M, d, seed, std::move(values));
}

} // namespace qbsde
