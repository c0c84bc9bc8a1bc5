#pragma once

// Deterministic parallel loop over independent work items. Workers pull
// disjoint index blocks and write into caller-owned slots, so the result is
// independent of scheduling; ROUGHBSDE_WORKERS caps the worker count.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace roughbsde {

inline int worker_count() {
    if (const char* env = std::getenv("ROUGHBSDE_WORKERS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

inline void parallel_for(long n, const std::function<void(long)>& fn) {
    const int workers = std::min<long>(worker_count(), n);
    if (workers <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    auto run = [&] {
        for (;;) {
            long i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers - 1; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

}  // namespace roughbsde
