#include <ixframe/partition.hpp>

#include <stdexcept>

namespace ixframe {

void PartitionOptions::validate() const {
    if (max_row_bytes > PackedRowPtr::kMaxSize) {
        raise(ErrorCode::kOutOfBounds, "max_row_bytes " + std::to_string(max_row_bytes) +
                                           " does not fit the 11-bit row size field");
    }
    if (batch_bytes > kMaxBatchBytes) {
        raise(ErrorCode::kOutOfBounds, "batch size " + std::to_string(batch_bytes) +
                                           " exceeds the 22-bit offset range (4 MiB)");
    }
    if (batch_bytes < kRecordHeaderBytes + max_row_bytes) {
        raise(ErrorCode::kOutOfBounds, "batch size " + std::to_string(batch_bytes) +
                                           " cannot hold a row of " + std::to_string(max_row_bytes) + " bytes");
    }
}

auto PartitionSnapshot::batch(std::uint32_t id) const -> const RowBatch& {
    if (id < batches_.size() && batches_[id] != nullptr) return *batches_[id];
    raise(ErrorCode::kOutOfBounds, "batch " + std::to_string(id) + " not in partition " + std::to_string(id_));
}

auto PartitionSnapshot::lookup(CanonicalKey key, std::optional<std::string_view> verify) const
    -> std::vector<RowBytes> {
    std::vector<RowBytes> out;
    for_each_match(key, verify, [&](RowBytes r) { out.push_back(r); });
    return out;
}

auto PartitionSnapshot::chain(CanonicalKey key) const -> std::vector<PackedRowPtr> {
    std::vector<PackedRowPtr> out;
    const std::uint64_t* head = keys_.find(key.raw);
    if (head == nullptr) return out;
    PackedRowPtr p = PackedRowPtr::from_raw(*head);
    while (!p.is_none() && out.size() <= row_count_) {
        out.push_back(p);
        p = batch(p.batch_id()).read(p).backward;
    }
    return out;
}

void PartitionSnapshot::scan(const std::function<void(RowBytes)>& fn) const {
    const auto measure = [this](RowBytes b) { return codec_->measure(b); };
    for (const auto* b : batches_) {
        b->scan(measure, [&](std::uint32_t, const BatchRecord& rec) { fn(rec.payload); });
    }
}

auto PartitionSnapshot::memory_stats() const -> PartitionMemoryStats {
    return {data_bytes_, keys_.footprint_bytes(), kRecordHeaderBytes * row_count_};
}

namespace {

auto require_index(const Schema& schema) -> std::size_t {
    if (schema.empty()) {
        raise(ErrorCode::kEmptySchema, "partition schema has no columns");
    }
    if (!schema.index_col()) {
        raise(ErrorCode::kInvalidSchema, "partition schema needs an index column");
    }
    return *schema.index_col();
}

}  // namespace

IndexedPartition::IndexedPartition(std::uint32_t id, Schema schema, PartitionOptions options)
    : IndexedPartition(id, std::make_shared<const RowCodec>(std::move(schema)), options) {}

IndexedPartition::IndexedPartition(std::uint32_t id, std::shared_ptr<const RowCodec> codec, PartitionOptions options)
    : id_(id), codec_(std::move(codec)), index_col_(require_index(codec_->schema())), options_(options) {
    options_.validate();
}

IndexedPartition::IndexedPartition(const PartitionSnapshot& parent)
    : id_(parent.id_),
      codec_(parent.codec_),
      index_col_(parent.index_col_),
      options_(parent.options_),
      keys_(parent.keys_),
      dir_(parent.dir_),
      inherited_tail_(parent.batches_.empty() ? nullptr : parent.dir_.get(parent.batches_.back()->id()).value()),
      next_batch_id_(parent.next_batch_id_),
      row_count_(parent.row_count_),
      data_bytes_(parent.data_bytes_) {}

auto IndexedPartition::writable_batch(std::size_t payload_bytes, BatchDirectory::Editor& dir) -> RowBatch& {
    if (inherited_tail_) {
        if (inherited_tail_->fits(payload_bytes)) {
            open_ = std::shared_ptr<RowBatch>(inherited_tail_->clone_unsealed());
            dir.upsert(open_->id(), open_);
        }
        inherited_tail_.reset();
    }
    if (open_ && open_->fits(payload_bytes)) return *open_;
    if (open_) open_->seal();
    if (next_batch_id_ > PackedRowPtr::kMaxBatchId) {
        raise(ErrorCode::kFieldOverflow, "partition " + std::to_string(id_) + " ran out of batch ids");
    }
    open_ = std::make_shared<RowBatch>(next_batch_id_++, options_.batch_bytes);
    dir.upsert(open_->id(), open_);
    return *open_;
}

auto IndexedPartition::insert(std::span<const KeyedRow> rows) -> std::size_t {
    if (frozen_) {
        raise(ErrorCode::kPartitionSealed, "partition " + std::to_string(id_) + " is frozen");
    }
    for (const auto& row : rows) {
        if (row.payload.size() > options_.max_row_bytes) {
            raise(ErrorCode::kRowTooLarge, "row of " + std::to_string(row.payload.size()) + " bytes, limit " +
                                               std::to_string(options_.max_row_bytes));
        }
    }
    auto keys = keys_.edit();
    auto dir = dir_.edit();
    std::size_t bytes = 0;
    for (const auto& row : rows) {
        const std::uint64_t* prev = keys.find(row.key.raw);
        const PackedRowPtr backward = prev != nullptr ? PackedRowPtr::from_raw(*prev) : PackedRowPtr::none();
        RowBatch& batch = writable_batch(row.payload.size(), dir);
        const auto offset = batch.try_append(backward, row.payload);
        keys.upsert(row.key.raw, PackedRowPtr::pack(batch.id(), *offset, row.payload.size()).raw());
        bytes += row.payload.size();
    }
    // Batches first: every pointer a reader can see must resolve.
    if (!dir.commit() || !keys.commit()) {
        throw std::logic_error("concurrent writer on single-owner partition");
    }
    data_bytes_ += bytes;
    row_count_.fetch_add(rows.size(), std::memory_order_release);
    return rows.size();
}

void IndexedPartition::insert(CanonicalKey key, RowBytes payload) {
    const KeyedRow row{key, payload};
    insert(std::span<const KeyedRow>(&row, 1));
}

auto IndexedPartition::lookup(CanonicalKey key, std::optional<std::string_view> verify) const
    -> std::vector<RowPayload> {
    // Key root first: the directory is published before it, so it resolves
    // every pointer reachable from the key root.
    const auto keys = keys_.snapshot();
    const auto dir = dir_.snapshot();
    std::vector<RowPayload> out;
    const std::uint64_t* head = keys.find(key.raw);
    if (head == nullptr) return out;
    const bool check = verify.has_value() && codec_->schema().column(index_col_).type == ColumnType::kUtf8;
    PackedRowPtr p = PackedRowPtr::from_raw(*head);
    while (!p.is_none()) {
        const BatchHandle* b = dir.find(p.batch_id());
        if (b == nullptr) {
            raise(ErrorCode::kOutOfBounds, "dangling batch " + std::to_string(p.batch_id()));
        }
        const auto rec = (*b)->read(p);
        if (!check || codec_->string_cell(rec.payload, index_col_) == *verify) {
            out.emplace_back(rec.payload.begin(), rec.payload.end());
        }
        p = rec.backward;
    }
    return out;
}

auto IndexedPartition::freeze() -> std::shared_ptr<const PartitionSnapshot> {
    if (open_) open_->seal();
    auto snap = std::shared_ptr<PartitionSnapshot>(new PartitionSnapshot());
    snap->id_ = id_;
    snap->codec_ = codec_;
    snap->index_col_ = index_col_;
    snap->options_ = options_;
    snap->keys_ = keys_.snapshot();
    snap->dir_ = dir_.snapshot();
    snap->next_batch_id_ = next_batch_id_;
    snap->row_count_ = row_count_.load(std::memory_order_acquire);
    snap->data_bytes_ = data_bytes_;
    snap->batches_.assign(next_batch_id_, nullptr);
    snap->dir_.for_each([&](std::uint64_t id, const BatchHandle& b) { snap->batches_.at(id) = b.get(); });
    frozen_ = true;
    open_.reset();
    inherited_tail_.reset();
    return snap;
}

}  // namespace ixframe
