#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace wharf {

/// 0 means one worker per hardware thread.
inline unsigned resolve_threads(unsigned threads) noexcept
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    return threads;
}

/// Splits [0, n) into contiguous blocks and runs body(begin, end, worker) on each.
/// The first exception thrown by any worker is rethrown after all have joined.
template <class Body>
void parallel_blocks(std::size_t n, unsigned threads, Body&& body)
{
    unsigned const t = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1)));
    if (t <= 1) {
        body(std::size_t{0}, n, 0u);
        return;
    }
    std::vector<std::exception_ptr> errors(t);
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned i = 0; i < t; ++i) {
        std::size_t const b = n * i / t;
        std::size_t const e = n * (i + 1) / t;
        pool.emplace_back([&, b, e, i] {
            try {
                body(b, e, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& err : errors) {
        if (err) {
            std::rethrow_exception(err);
        }
    }
}

inline unsigned block_count(std::size_t n, unsigned threads) noexcept
{
    return static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(n, 1)));
}

}  // namespace wharf
