#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace wcausal {

// Runs fn(i) for every i in [0, count) on up to `threads` workers
// (0 means the hardware count). Callers must write results into
// preallocated per-index slots; nothing about the claim order is
// deterministic, so any order-sensitive reduction belongs after the
// call. The first worker exception is rethrown once all workers have
// joined.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    unsigned want = threads != 0 ? threads : std::thread::hardware_concurrency();
    if (want == 0) want = 1;
    if (static_cast<std::size_t>(want) > count) want = static_cast<unsigned>(count);
    if (want <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(want);
    for (unsigned t = 0; t < want; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace wcausal
