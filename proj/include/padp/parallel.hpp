#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace padp {

// Deterministic parallel loop: indices are split into fixed contiguous blocks,
// one per worker, so the assignment of work to workers never depends on timing.
// Each body invocation must write only to its own index's slot; reductions are
// then performed sequentially by the caller in index order, which makes every
// result bit-identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& body) {
    if (n == 0) return;
    const std::size_t w = static_cast<std::size_t>(std::max(workers, 1));
    if (w <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t threads = std::min(w, n);
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi]() {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace padp
