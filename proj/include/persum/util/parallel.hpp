#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace persum {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers write results
/// into index-addressed slots so output order never depends on scheduling.
/// The first exception (lowest index) is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::exception_ptr first_err;
    std::size_t first_err_index = n;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= n || failed.load()) return;
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lk(err_mu);
                        if (i < first_err_index) {
                            first_err_index = i;
                            first_err = std::current_exception();
                        }
                        failed = true;
                    }
                }
            });
        }
    }
    if (first_err) std::rethrow_exception(first_err);
}

} // namespace persum
