#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace polycf::detail {

inline int resolve_threads(int requested, std::int64_t work_items) {
    int threads = requested > 0 ? requested
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    return static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(work_items, 1)));
}

// Runs fn(worker, begin, end) over contiguous chunks of [0, count).
// Chunking is static, so the partition depends only on `count` and the
// resolved thread count.
template <typename Fn>
void parallel_chunks(std::int64_t count, int threads, Fn&& fn) {
    threads = resolve_threads(threads, count);
    const std::int64_t chunk = (count + threads - 1) / threads;
    if (threads <= 1 || count <= 1) {
        if (count > 0) fn(0, std::int64_t{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        const std::int64_t begin = t * chunk;
        const std::int64_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, t, begin, end] { fn(t, begin, end); });
    }
    for (auto& worker : pool) worker.join();
}

// Runs fn(index) for index in [0, count) across `threads` workers. Each
// index is processed exactly once; callers write results into per-index
// slots so reductions can be replayed in a fixed order afterwards.
template <typename Fn>
void parallel_for(std::int64_t count, int threads, Fn&& fn) {
    threads = resolve_threads(threads, count);
    if (threads <= 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::int64_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t begin = t * chunk;
        const std::int64_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (std::int64_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& worker : pool) worker.join();
}

}  // namespace polycf::detail
