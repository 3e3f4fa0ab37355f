#ifndef CTQW_PARALLEL_HPP
#define CTQW_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ctqw {

/// Worker count from CTQW_WORKERS, else the hardware concurrency (at least 1).
inline unsigned default_worker_count()
{
    if (const char* env = std::getenv("CTQW_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks write
/// into caller-owned slots indexed by i, so the result does not depend on
/// scheduling. If any task throws, the exception of the lowest index is
/// rethrown after all workers have joined.
template <class Task>
void parallel_for(std::size_t count, unsigned workers, Task&& task)
{
    if (count == 0) return;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ctqw

#endif  // CTQW_PARALLEL_HPP
