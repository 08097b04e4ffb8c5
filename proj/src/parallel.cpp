#include "qbsde/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace qbsde {

namespace {
std::atomic<unsigned> g_max_threads{1};
}

void set_max_threads(unsigned n) { g_max_threads.store(n == 0 ? 1u : n); }
unsigned max_threads() { return g_max_threads.load(); }

void parallel_chunks(std::size_t count,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
    const std::size_t chunks = chunk_count(count);
    if (chunks == 0) return;

    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(max_threads(), chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            body(c, c * kChunkSize, std::min(count, (c + 1) * kChunkSize));
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    auto run = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) return;
            body(c, c * kChunkSize, std::min(count, (c + 1) * kChunkSize));
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

double chunked_sum(std::size_t count, const std::function<double(std::size_t)>& f) {
    std::vector<double> partial(chunk_count(count), 0.0);
    parallel_chunks(count, [&](std::size_t c, std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        partial[c] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

} // namespace qbsde
