#pragma once

#include <cstdint>

namespace qbsde {

// Counter-based random stream: every draw is a pure function of
// (seed, stream, counter), so any element of an ensemble can be produced
// independently of the others and results do not depend on how work is
// split across threads.
//
// The mixer is the splitmix64 finalizer applied to the chained key; one
// 64-bit output per (stream, counter) pair.
namespace rng {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ stream);
    h = mix64(h ^ counter);
    return h;
}

// Uniform on the open interval (0, 1); 53 significand bits.
inline double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Inverse of the standard normal CDF, Wichura's algorithm AS 241 (PPND16).
// Absolute error below 1e-15 over (0, 1).
double normal_icdf(double p);

inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return normal_icdf(uniform01(keyed(seed, stream, counter)));
}

} // namespace rng

// Convenience sequential stream on top of the counter-based core, for
// test-data generation where a stateful generator reads better.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream) {}

    double uniform() { return rng::uniform01(rng::keyed(seed_, stream_, counter_++)); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return rng::normal_icdf(uniform()); }
    std::uint64_t bits() { return rng::keyed(seed_, stream_, counter_++); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace qbsde
