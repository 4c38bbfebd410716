#pragma once

#include <ixframe/canonical_key.hpp>
#include <ixframe/error.hpp>
#include <ixframe/hash_trie.hpp>
#include <ixframe/packed_ptr.hpp>
#include <ixframe/row_batch.hpp>
#include <ixframe/row_codec.hpp>

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ixframe {

struct PartitionOptions {
    std::uint32_t batch_bytes = kDefaultBatchBytes;
    std::size_t max_row_bytes = kDefaultMaxRowBytes;

    /// Throws OutOfBounds when a batch cannot hold a maximal row or a row
    /// size does not fit the packed pointer.
    void validate() const;
};

using BatchHandle = std::shared_ptr<const RowBatch>;
using BatchDirectory = HashTrie<BatchHandle>;
using BatchDirectorySnapshot = TrieSnapshot<BatchHandle>;

struct KeyedRow {
    CanonicalKey key;
    RowBytes payload;
};

struct PartitionMemoryStats {
    std::size_t data_bytes = 0;
    std::size_t index_bytes = 0;
    std::size_t backptr_bytes = 0;
};

/// Frozen state of one hash partition. Immutable and safe to share between
/// threads; row views it hands out stay valid while the snapshot is alive.
class PartitionSnapshot {
public:
    [[nodiscard]] auto id() const -> std::uint32_t { return id_; }
    [[nodiscard]] auto schema() const -> const Schema& { return codec_->schema(); }
    [[nodiscard]] auto codec() const -> const RowCodec& { return *codec_; }
    [[nodiscard]] auto index_col() const -> std::size_t { return index_col_; }
    [[nodiscard]] auto options() const -> const PartitionOptions& { return options_; }
    [[nodiscard]] auto row_count() const -> std::size_t { return row_count_; }
    [[nodiscard]] auto data_bytes() const -> std::size_t { return data_bytes_; }
    [[nodiscard]] auto batch_count() const -> std::size_t { return batches_.size(); }

    [[nodiscard]] auto key_trie() const -> const KeyTrieSnapshot& { return keys_; }
    [[nodiscard]] auto batch_directory() const -> const BatchDirectorySnapshot& { return dir_; }
    [[nodiscard]] auto batch(std::uint32_t id) const -> const RowBatch&;

    /// Rows whose canonical key matches, newest first. With `verify` set,
    /// rows whose index string differs are skipped.
    [[nodiscard]] auto lookup(CanonicalKey key, std::optional<std::string_view> verify = std::nullopt) const
        -> std::vector<RowBytes>;
    [[nodiscard]] auto lookup(const KeyProbe& probe) const -> std::vector<RowBytes> {
        return lookup(probe.key, probe.verify);
    }

    template <class F>
    void for_each_match(CanonicalKey key, std::optional<std::string_view> verify, F&& fn) const {
        const std::uint64_t* head = keys_.find(key.raw);
        if (head == nullptr) return;
        const bool check = verify.has_value() && codec_->schema().column(index_col_).type == ColumnType::kUtf8;
        PackedRowPtr p = PackedRowPtr::from_raw(*head);
        std::size_t steps = 0;
        while (!p.is_none()) {
            if (++steps > row_count_) {
                raise(ErrorCode::kCorruptPayload, "backward chain longer than partition");
            }
            const auto rec = batch(p.batch_id()).read(p);
            if (!check || codec_->string_cell(rec.payload, index_col_) == *verify) {
                fn(rec.payload);
            }
            p = rec.backward;
        }
    }

    /// Chain of pointers for `key`, newest first.
    [[nodiscard]] auto chain(CanonicalKey key) const -> std::vector<PackedRowPtr>;

    /// Every row once, in batch order then record order.
    void scan(const std::function<void(RowBytes)>& fn) const;

    [[nodiscard]] auto memory_stats() const -> PartitionMemoryStats;

private:
    friend class IndexedPartition;
    PartitionSnapshot() = default;

    std::uint32_t id_ = 0;
    std::shared_ptr<const RowCodec> codec_;
    std::size_t index_col_ = 0;
    PartitionOptions options_;
    KeyTrieSnapshot keys_;
    BatchDirectorySnapshot dir_;
    std::vector<const RowBatch*> batches_;  // by batch id, resolved from dir_
    std::uint32_t next_batch_id_ = 0;
    std::size_t row_count_ = 0;
    std::size_t data_bytes_ = 0;
};

/// A live, single-owner partition: the key index, the batch directory and the
/// batches. Lookups are safe from other threads while the owner inserts.
class IndexedPartition {
public:
    /// `schema` must name an index column.
    IndexedPartition(std::uint32_t id, Schema schema, PartitionOptions options = {});
    IndexedPartition(std::uint32_t id, std::shared_ptr<const RowCodec> codec, PartitionOptions options = {});

    /// Successor of a frozen partition. Shares every batch with `parent`; the
    /// parent's tail batch is copied on the first insert that fits into it.
    explicit IndexedPartition(const PartitionSnapshot& parent);

    IndexedPartition(const IndexedPartition&) = delete;
    auto operator=(const IndexedPartition&) -> IndexedPartition& = delete;

    [[nodiscard]] auto id() const -> std::uint32_t { return id_; }
    [[nodiscard]] auto codec() const -> const RowCodec& { return *codec_; }
    [[nodiscard]] auto row_count() const -> std::size_t { return row_count_.load(std::memory_order_acquire); }
    [[nodiscard]] auto frozen() const -> bool { return frozen_; }

    /// Appends rows and links each behind the previous row with its key.
    /// All rows become visible to readers together.
    auto insert(std::span<const KeyedRow> rows) -> std::size_t;
    void insert(CanonicalKey key, RowBytes payload);

    /// Copies of the matching rows, newest first.
    [[nodiscard]] auto lookup(CanonicalKey key, std::optional<std::string_view> verify = std::nullopt) const
        -> std::vector<RowPayload>;

    /// Seals the tail batch and snapshots both tries. The partition accepts
    /// no further inserts.
    auto freeze() -> std::shared_ptr<const PartitionSnapshot>;

private:
    auto writable_batch(std::size_t payload_bytes, BatchDirectory::Editor& dir) -> RowBatch&;

    std::uint32_t id_;
    std::shared_ptr<const RowCodec> codec_;
    std::size_t index_col_;
    PartitionOptions options_;
    KeyTrie keys_;
    BatchDirectory dir_;
    std::shared_ptr<RowBatch> open_;
    BatchHandle inherited_tail_;
    std::uint32_t next_batch_id_ = 0;
    std::atomic<std::size_t> row_count_{0};
    std::size_t data_bytes_ = 0;
    bool frozen_ = false;
};

}  // namespace ixframe
