#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace prc {

/// Runs fn(i) for i in [0, n_tasks) on up to `workers` threads.
/// Tasks write to preallocated result slots indexed by i, so the outcome is
/// identical for any worker count. The first exception thrown by a task is
/// rethrown on the calling thread after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n_tasks, int workers, Fn&& fn) {
    if (n_tasks == 0) return;
    std::size_t n_threads = workers < 1 ? 1 : static_cast<std::size_t>(workers);
    if (n_threads > n_tasks) n_threads = n_tasks;
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) break;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace prc
