// Minimal data-parallel helper.  The KAM_THREADS environment variable caps
// the number of worker threads (default: hardware concurrency).  Only used
// for reductions that are exactly order-independent (min/max), so results
// are bit-identical for any thread count.

#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace kamred {

inline int max_threads() {
    if (const char *env = std::getenv("KAM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(chunk_index, begin, end) over [0, n) split into contiguous chunks,
// one per worker.  fn must only touch its own chunk's state.
inline void parallel_chunks(std::int64_t n,
                            const std::function<void(int, std::int64_t, std::int64_t)> &fn) {
    const int workers = static_cast<int>(std::min<std::int64_t>(max_threads(), std::max<std::int64_t>(n, 1)));
    if (workers <= 1 || n <= 1) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t step = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t b = w * step, e = std::min<std::int64_t>(n, b + step);
        if (b >= e) break;
        pool.emplace_back(fn, w, b, e);
    }
    for (auto &t : pool) t.join();
}

}  // namespace kamred
