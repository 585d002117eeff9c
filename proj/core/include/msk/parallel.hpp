#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace msk {

// Runs fn(0..n_items-1) on up to `threads` workers. Results land in a
// vector slot per index, so downstream reductions are deterministic and
// independent of the worker count.
template <typename Fn>
auto parallel_map(int n_items, int threads, Fn&& fn)
    -> std::vector<decltype(fn(0))> {
    using T = decltype(fn(0));
    std::vector<T> out(n_items);
    if (threads <= 1 || n_items <= 1) {
        for (int i = 0; i < n_items; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_items) return;
            out[i] = fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min(threads, n_items);
    pool.reserve(k);
    for (int t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

} // namespace msk
