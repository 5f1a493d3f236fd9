#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nanoevo {

/// Runs fn(0..count-1) on up to `jobs` threads; results come back in index order.
/// Each call must only touch its own state (one world or chain per replicate).
template <class Fn>
auto run_replicates(std::size_t count, std::size_t jobs, Fn&& fn)
{
    using Result = decltype(fn(std::size_t{0}));
    std::vector<Result> results(count);
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i)
            results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    results[i] = fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    }
    for (auto& w : workers)
        w.join();
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

} // namespace nanoevo
