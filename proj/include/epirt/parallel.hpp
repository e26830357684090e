#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace epirt {

// Runs fn(0..n_tasks-1) on up to `workers` threads. The first exception is
// rethrown on the caller's thread after every worker has drained.
template <class Fn>
void parallel_for(std::size_t n_tasks, std::size_t workers, Fn&& fn) {
    if (workers == 0) {
        throw std::invalid_argument("parallel_for: need at least one worker");
    }
    if (n_tasks == 0) return;
    workers = std::min(workers, n_tasks);
    if (workers == 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_tasks || failed.load()) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace epirt
