#pragma once

#include <cstdlib>
#include <exception>
#include <algorithm>
#include <string>
#include <thread>
#include <vector>

namespace edgeshift {

/// Worker count from EDGESHIFT_WORKERS, falling back to the hardware count.
inline unsigned worker_count() {
    if (const char* env = std::getenv("EDGESHIFT_WORKERS")) {
        try {
            const long n = std::stol(env);
            if (n >= 1) return static_cast<unsigned>(n);
        } catch (...) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Evaluates `fn(i)` for i in [0, count) and returns the results in index
/// order, so the output never depends on the number of workers. The first
/// exception (by index) thrown by any task is rethrown.
template <typename Fn>
auto parallel_map(std::size_t count, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> out(count);
    const std::size_t workers = std::min<std::size_t>(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
        return out;
    }

    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace edgeshift
