#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace spinlat {

// Runs fn(i) for i in [0, n) on `workers` threads. Work items write into
// pre-sized slots keyed by index, so results never depend on the worker
// count; aggregation happens after the join, in index order.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int k = std::min(workers, n);
    pool.reserve(k);
    std::exception_ptr error = nullptr;
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    for (int w = 0; w < k; ++w) {
        pool.emplace_back([&] {
            try {
                int i;
                while ((i = next.fetch_add(1)) < n && !failed.load(std::memory_order_relaxed)) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

}  // namespace spinlat
