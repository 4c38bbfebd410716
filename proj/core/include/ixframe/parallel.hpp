#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace ixframe {

/// Worker threads to use by default: hardware concurrency, capped by the
/// IXFRAME_THREADS environment variable when it is set.
auto default_thread_count() -> std::size_t;

/// IXFRAME_THREADS when set to a positive integer.
auto thread_cap() -> std::optional<std::size_t>;

/// Runs fn(0..n-1) on up to `threads` threads (the caller's thread included).
/// The first exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace ixframe
