#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace smoothkit {

// Thread cap from SMOOTHKIT_THREADS (0 or unset = hardware concurrency).
inline unsigned thread_limit() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SMOOTHKIT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return hw;
}

// Runs body(i) for i in [0, n). Each index must write only to its own
// output slot; results are then deterministic regardless of scheduling.
// Exceptions from workers are rethrown on the calling thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned nthreads = thread_limit();
    if (nthreads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (nthreads > n) nthreads = static_cast<unsigned>(n);

    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(nthreads);
    workers.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) {
        workers.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += nthreads) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace smoothkit
