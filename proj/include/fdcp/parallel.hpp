#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fdcp {

/// Worker count for `requested` (0 = hardware concurrency).
inline std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Splits [0, count) into one contiguous block per worker and runs
/// body(first, last) on each. The first exception thrown is rethrown.
template <typename Body>
void parallel_blocks(std::size_t count, std::size_t threads, Body&& body) {
    threads = std::min(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (threads <= 1) {
        body(std::size_t{0}, count);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t first = count * t / threads;
        const std::size_t last = count * (t + 1) / threads;
        workers.emplace_back([&, first, last] {
            try {
                body(first, last);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    for (auto& worker : workers) {
        worker.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    parallel_blocks(count, threads, [&](std::size_t first, std::size_t last) {
        for (std::size_t i = first; i < last; ++i) {
            body(i);
        }
    });
}

}  // namespace fdcp
