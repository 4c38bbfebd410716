#include <ixframe/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ixframe {

auto thread_cap() -> std::optional<std::size_t> {
    const char* env = std::getenv("IXFRAME_THREADS");
    if (env == nullptr) return std::nullopt;
    try {
        const auto cap = std::stoul(env);
        if (cap > 0) return cap;
    } catch (const std::exception&) {
        // ignore malformed values
    }
    return std::nullopt;
}

auto default_thread_count() -> std::size_t {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (auto cap = thread_cap()) n = std::min(n, *cap);
    return n;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&] {
        for (;;) {
            const auto i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!error) error = std::current_exception();
                next.store(n, std::memory_order_relaxed);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads - 1);
        for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
        work();
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace ixframe
