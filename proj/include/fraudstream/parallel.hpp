#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace fraudstream {

/// Index-space parallel loop. Each index is processed exactly once; callers
/// must write only to per-index slots so results are order-independent.
/// `grain` is the minimum n worth spawning threads for.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned max_threads = 0, std::size_t grain = 2048) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (max_threads != 0 && max_threads < hw) hw = max_threads;
    if (hw <= 1 || n < std::max<std::size_t>(grain, 2)) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    const std::size_t chunk = (n + hw - 1) / hw;
    for (unsigned t = 0; t < hw; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

}  // namespace fraudstream
