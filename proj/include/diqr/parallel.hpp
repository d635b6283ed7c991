#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace diqr {

inline int resolve_workers(int workers) {
    if (workers > 0) return workers;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(std::min(hc, 16u));
}

// Calls body(i) for i in [0, count). Worker w owns the contiguous block
// [w*count/W, (w+1)*count/W), so any per-index output is independent of W.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(resolve_workers(workers)),
                                                std::max<std::size_t>(count, 1));
    if (w <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(w);
    for (std::size_t t = 0; t < w; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t * count / w; i < (t + 1) * count / w; ++i) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace diqr
