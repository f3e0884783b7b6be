#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace pathgibbs {

// Runs fn(i) for i in [0, n). Work is split into contiguous blocks, one per
// worker. With workers <= 1 this is a plain loop on the calling thread.
// Callers that need deterministic results across worker counts must make
// fn(i) depend only on i (e.g. per-index RNG streams).
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t w = static_cast<std::size_t>(workers);
    if (w > n) w = n;
    std::vector<std::thread> threads;
    threads.reserve(w);
    std::size_t chunk = (n + w - 1) / w;
    for (std::size_t t = 0; t < w; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

inline int default_workers() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

} // namespace pathgibbs
