#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace vqkit {

/// Index-parallel map with results in input order. Exceptions from workers
/// are rethrown on the calling thread.
template <typename R, typename Fn>
std::vector<R> parallel_map(size_t n, Fn&& fn) {
    std::vector<R> results(n);
    if (n == 0) return results;
    const size_t workers = std::min<size_t>(
        n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers == 1) {
        for (size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (size_t i = w; i < n; i += workers) results[i] = fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace vqkit
