#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace qbsde {

// Worker cap shared by all parallel loops. 1 disables threading.
void set_max_threads(unsigned n);
unsigned max_threads();

// Fixed-size chunking over [0, count). Chunk boundaries depend only on
// `count`, never on the worker cap, so per-chunk results can be folded in
// chunk order and every reduction is bit-identical for any thread count.
inline constexpr std::size_t kChunkSize = 4096;

inline std::size_t chunk_count(std::size_t count) {
    return (count + kChunkSize - 1) / kChunkSize;
}

// Runs body(chunk_index, begin, end) for each chunk, possibly on several
// threads. Bodies must write only to disjoint, preallocated slots.
void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

// Deterministic sum of f(i) over [0, count): chunk partials folded in order.
double chunked_sum(std::size_t count, const std::function<double(std::size_t)>& f);

inline double chunked_sum(std::span<const double> xs) {
    return chunked_sum(xs.size(), [&](std::size_t i) { return xs[i]; });
}

inline double chunked_mean(std::span<const double> xs) {
    return xs.empty() ? 0.0 : chunked_sum(xs) / static_cast<double>(xs.size());
}

} // namespace qbsde
