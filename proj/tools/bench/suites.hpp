#pragma once

#include "bench_report.hpp"

#include <ixframe/row_batch.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ixframe::bench {

struct BenchConfig {
    std::uint64_t seed = 42;
    std::size_t partitions = 0;  // 0 picks default_partition_count()
    std::uint32_t batch_bytes = kDefaultBatchBytes;
    std::size_t broadcast_threshold = 10 * 1024 * 1024;
    std::size_t executors = 4;
    std::size_t threads = 0;  // 0 picks default_thread_count()
    std::size_t build_rows = 10'000'000;
    double rows_per_key = 20.0;
    /// Probe sizes for join-scale; empty means S/M/L/XL at 1e-4..1e-1 of
    /// build_rows.
    std::vector<std::size_t> probe_rows;
    std::size_t reps = 10;
    /// Length of query sequences (read-latency and fault-tolerance).
    std::size_t queries = 200;
    std::size_t append_every = 5;
    std::size_t memory_cap = 0;  // bytes; 0 picks default_memory_cap()
};

/// 80% of physical memory.
auto default_memory_cap() -> std::size_t;

auto suite_names() -> const std::vector<std::string>&;

using Progress = std::function<void(std::string_view)>;

/// Throws InvalidSpec for an unknown suite or bad config, OOMGuard when the
/// projected footprint exceeds the cap, and ExecFailure when the indexed and
/// baseline paths disagree.
auto run_suite(std::string_view name, const BenchConfig& cfg, const Progress& progress = {}) -> BenchReport;

}  // namespace ixframe::bench
