#pragma once

#include <ixframe/canonical_key.hpp>
#include <ixframe/partition.hpp>
#include <ixframe/plain_table.hpp>
#include <ixframe/types.hpp>

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace ixframe {

/// max(1, 2 x hardware threads); the usual one-to-four partitions per core.
auto default_partition_count() -> std::size_t;

struct IndexOptions {
    std::size_t partitions = 0;  // 0 picks default_partition_count()
    PartitionOptions partition;
    std::size_t threads = 0;     // 0 picks default_thread_count()
};

struct DataFrameStats {
    std::size_t row_count = 0;
    std::size_t data_bytes = 0;
    std::size_t index_bytes = 0;
    std::size_t backptr_bytes = 0;
    double index_overhead_ratio = 0.0;  // index_bytes / data_bytes, 0 when empty
    std::vector<PartitionMemoryStats> partitions;
};

/// Hands out version numbers for one lineage (a create_index call and every
/// version appended from it). The root is version 1.
class VersionAllocator {
public:
    explicit VersionAllocator(std::uint64_t next = 2) : next_(next) {}
    auto next() -> std::uint64_t { return next_.fetch_add(1, std::memory_order_relaxed); }
    /// Makes sure `v` is never handed out again.
    void observe(std::uint64_t v) {
        auto cur = next_.load(std::memory_order_relaxed);
        while (cur <= v && !next_.compare_exchange_weak(cur, v + 1, std::memory_order_relaxed)) {
        }
    }
    [[nodiscard]] auto peek() const -> std::uint64_t { return next_.load(std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> next_;
};

/// One immutable version of a hash-partitioned, indexed table.
///
/// Versions are cheap handles; copying one shares everything. Appending
/// never changes the version it is called on, so any number of children can
/// be derived from one parent and queried side by side.
class IndexedDataFrame {
public:
    /// Shuffles every row of `table` to partition hash(key) mod P and indexes
    /// it on column `col`.
    static auto create_index(const PlainTable& table, std::size_t col, IndexOptions options = {})
        -> IndexedDataFrame;

    /// Everything already lives in memory; kept so call sites read like the
    /// usual create-then-cache idiom.
    [[nodiscard]] auto cache() const -> const IndexedDataFrame& { return *this; }

    /// Rows whose index column equals `key`, newest first.
    [[nodiscard]] auto get_rows(const Value& key) const -> PlainTable;

    /// A child version holding this version's rows plus `rows`.
    [[nodiscard]] auto append_rows(const PlainTable& rows) const -> IndexedDataFrame;
    /// append_rows with a caller-chosen version number, for replaying a log.
    /// `version` must exceed this version's number (InvalidPlan otherwise) and
    /// is never handed out by append_rows afterwards.
    [[nodiscard]] auto append_rows_as(const PlainTable& rows, std::uint64_t version) const -> IndexedDataFrame;

    [[nodiscard]] auto stats() const -> DataFrameStats;

    /// All rows, partition by partition.
    [[nodiscard]] auto scan() const -> PlainTable;

    [[nodiscard]] auto version_no() const -> std::uint64_t;
    [[nodiscard]] auto parent_version() const -> std::optional<std::uint64_t>;
    [[nodiscard]] auto schema() const -> const Schema&;
    [[nodiscard]] auto codec() const -> const RowCodec&;
    [[nodiscard]] auto shared_codec() const -> const std::shared_ptr<const RowCodec>&;
    [[nodiscard]] auto index_col() const -> std::size_t;
    [[nodiscard]] auto num_partitions() const -> std::size_t;
    [[nodiscard]] auto row_count() const -> std::size_t;
    [[nodiscard]] auto byte_size() const -> std::size_t;
    [[nodiscard]] auto options() const -> const IndexOptions&;
    [[nodiscard]] auto partition(std::size_t i) const -> const PartitionSnapshot&;
    [[nodiscard]] auto shared_partition(std::size_t i) const -> std::shared_ptr<const PartitionSnapshot>;

    /// Canonical key of `key` converted to the index column's type.
    [[nodiscard]] auto key_of(const Value& key) const -> CanonicalKey;
    [[nodiscard]] auto partition_for(const Value& key) const -> std::size_t;

    /// How many get_rows calls reached each partition of this version.
    [[nodiscard]] auto partition_touches() const -> std::vector<std::uint64_t>;

private:
    struct State;
    explicit IndexedDataFrame(std::shared_ptr<const State> state) : state_(std::move(state)) {}
    [[nodiscard]] auto derive(const PlainTable& rows, std::uint64_t version) const -> IndexedDataFrame;

    std::shared_ptr<const State> state_;
};

}  // namespace ixframe
