#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fwdreg::detail {

/**
 * Runs `fn(i)` for i in [0, count) on up to `threads` workers using static
 * contiguous chunks. Callers write results into per-index slots, so output
 * never depends on the thread count. The first exception thrown by any
 * worker is rethrown on the calling thread.
 */
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (std::size_t w = 0; w < threads; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
}

} // namespace fwdreg::detail
