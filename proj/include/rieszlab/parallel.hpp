#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rieszlab {

namespace detail {
inline std::atomic<int>& thread_count_storage() {
    static std::atomic<int> count{1};
    return count;
}
} // namespace detail

/// Process-wide worker count for parallel_for (1 = serial). Set once by the
/// CLI from --threads before any work runs.
inline void set_thread_count(int n) { detail::thread_count_storage().store(n < 1 ? 1 : n); }
inline int thread_count() { return detail::thread_count_storage().load(); }

/// Runs task(i) for i in [0, n). Each index writes only its own slot in the
/// caller's output, and indices are partitioned statically, so results are
/// identical for every thread count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task) {
    const int workers = thread_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += w) task(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace rieszlab
