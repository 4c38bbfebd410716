#pragma once

#include <ixframe/dataframe.hpp>
#include <ixframe/plain_table.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <variant>
#include <vector>

namespace ixframe {

struct CreateIndexEntry {
    std::uint64_t version = 1;
    std::size_t index_col = 0;
    std::size_t partitions = 1;
    PartitionOptions partition;
    PlainTable rows;
};

struct AppendEntry {
    std::uint64_t version = 0;
    std::uint64_t parent = 0;
    PlainTable rows;
};

using LogEntry = std::variant<CreateIndexEntry, AppendEntry>;

/// Append-only record of one lineage: a CreateIndex entry followed by
/// AppendBatch entries. Replaying it reproduces every version exactly.
///
/// Copies share entries, so snapshotting a log for another thread is cheap.
class ReplayLog {
public:
    ReplayLog() = default;

    /// Starts a log for `df`, which must be a root version (no parent).
    static auto for_frame(const IndexedDataFrame& df, const PlainTable& rows) -> ReplayLog;

    void record_create(CreateIndexEntry entry);
    /// Throws CorruptLog if `parent` is unknown or `version` is taken.
    void record_append(AppendEntry entry);
    /// Records `child` as appended from its parent with `rows`.
    void record_append(const IndexedDataFrame& child, const PlainTable& rows);

    [[nodiscard]] auto size() const -> std::size_t { return entries_.size(); }
    [[nodiscard]] auto empty() const -> bool { return entries_.empty(); }
    [[nodiscard]] auto entry(std::size_t i) const -> const LogEntry& { return *entries_.at(i); }
    [[nodiscard]] auto versions() const -> std::vector<std::uint64_t>;
    [[nodiscard]] auto contains(std::uint64_t version) const -> bool { return by_version_.contains(version); }
    [[nodiscard]] auto latest_version() const -> std::uint64_t;
    [[nodiscard]] auto create_entry() const -> const CreateIndexEntry&;
    /// Versions from the root to `version`, inclusive.
    [[nodiscard]] auto lineage(std::uint64_t version) const -> std::vector<std::uint64_t>;

    /// The dataframe at `version`, rebuilt from scratch.
    [[nodiscard]] auto replay(std::uint64_t version, std::size_t threads = 0) const -> IndexedDataFrame;
    /// Every version, rebuilt with structural sharing along the lineage.
    [[nodiscard]] auto replay_all(std::size_t threads = 0) const -> std::map<std::uint64_t, IndexedDataFrame>;
    /// One partition of `version`, replaying only the rows routed to it.
    [[nodiscard]] auto rebuild_partition(std::uint64_t version, std::size_t partition) const
        -> std::shared_ptr<const PartitionSnapshot>;

    /// Framed form: per record a u32 LE length, the record, and a u32 LE
    /// CRC-32 of the record. See docs/format.md.
    [[nodiscard]] auto encode() const -> std::vector<std::uint8_t>;
    /// Throws CorruptLog on truncation, bad CRC or malformed records.
    static auto decode(std::span<const std::uint8_t> bytes) -> ReplayLog;

    void save(const std::filesystem::path& path) const;
    static auto load(const std::filesystem::path& path) -> ReplayLog;

    static auto encode_record(const LogEntry& entry) -> std::vector<std::uint8_t>;
    static auto decode_record(std::span<const std::uint8_t> record) -> LogEntry;

private:
    void add(std::shared_ptr<const LogEntry> entry);

    std::vector<std::shared_ptr<const LogEntry>> entries_;
    std::map<std::uint64_t, std::size_t> by_version_;
};

}  // namespace ixframe
