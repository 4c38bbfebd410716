#include <ixframe/row_batch.hpp>

#include <ixframe/error.hpp>

#include <cstring>

namespace ixframe {

auto PackedRowPtr::pack(std::uint64_t batch_id, std::uint64_t offset_bytes, std::uint64_t row_size_bytes)
    -> PackedRowPtr {
    if (batch_id > kMaxBatchId) {
        raise(ErrorCode::kFieldOverflow, "batch id " + std::to_string(batch_id) + " exceeds 31 bits");
    }
    if (offset_bytes > kMaxOffset) {
        raise(ErrorCode::kFieldOverflow, "offset " + std::to_string(offset_bytes) + " exceeds 22 bits");
    }
    if (row_size_bytes > kMaxSize) {
        raise(ErrorCode::kFieldOverflow, "row size " + std::to_string(row_size_bytes) + " exceeds 11 bits");
    }
    return PackedRowPtr((batch_id << (kOffsetBits + kSizeBits)) | (offset_bytes << kSizeBits) | row_size_bytes);
}

auto to_string(PackedRowPtr ptr) -> std::string {
    if (ptr.is_none()) return "ptr(none)";
    return "ptr(batch=" + std::to_string(ptr.batch_id()) + ", offset=" + std::to_string(ptr.offset()) +
           ", size=" + std::to_string(ptr.row_size()) + ")";
}

RowBatch::RowBatch(std::uint32_t id, std::uint32_t capacity_bytes) : id_(id), capacity_(capacity_bytes) {
    if (id > PackedRowPtr::kMaxBatchId) {
        raise(ErrorCode::kFieldOverflow, "batch id exceeds 31 bits");
    }
    if (capacity_bytes > kMaxBatchBytes || capacity_bytes <= kRecordHeaderBytes) {
        raise(ErrorCode::kOutOfBounds, "batch capacity must be in (8, 4 MiB], got " + std::to_string(capacity_bytes));
    }
    data_ = std::make_unique_for_overwrite<std::uint8_t[]>(capacity_bytes);
}

auto RowBatch::clone_unsealed() const -> std::unique_ptr<RowBatch> {
    auto copy = std::make_unique<RowBatch>(id_, capacity_);
    const auto n = size();
    std::memcpy(copy->data_.get(), data_.get(), n);
    copy->cursor_.store(n, std::memory_order_release);
    return copy;
}

auto RowBatch::try_append(PackedRowPtr backward, RowBytes payload) -> std::optional<std::uint32_t> {
    if (sealed()) {
        raise(ErrorCode::kBatchSealed, "append to sealed batch " + std::to_string(id_));
    }
    const auto at = cursor_.load(std::memory_order_relaxed);
    const std::size_t need = kRecordHeaderBytes + payload.size();
    if (need > capacity_ - at) {
        return std::nullopt;
    }
    const auto raw = backward.raw();
    std::memcpy(data_.get() + at, &raw, kRecordHeaderBytes);
    if (!payload.empty()) {
        std::memcpy(data_.get() + at + kRecordHeaderBytes, payload.data(), payload.size());
    }
    cursor_.store(at + static_cast<std::uint32_t>(need), std::memory_order_release);
    return at;
}

auto RowBatch::append(PackedRowPtr backward, RowBytes payload) -> std::uint32_t {
    auto at = try_append(backward, payload);
    if (!at) {
        raise(ErrorCode::kBatchFull, "batch " + std::to_string(id_) + " has " + std::to_string(remaining()) +
                                         " bytes left, record needs " +
                                         std::to_string(kRecordHeaderBytes + payload.size()));
    }
    return *at;
}

auto RowBatch::read(PackedRowPtr ptr) const -> BatchRecord {
    const std::uint64_t end = std::uint64_t{ptr.offset()} + kRecordHeaderBytes + ptr.row_size();
    if (ptr.is_none() || ptr.batch_id() != id_ || end > size()) {
        raise(ErrorCode::kOutOfBounds, to_string(ptr) + " outside batch " + std::to_string(id_) + " of " +
                                           std::to_string(size()) + " bytes");
    }
    std::uint64_t raw;
    std::memcpy(&raw, data_.get() + ptr.offset(), kRecordHeaderBytes);
    return {PackedRowPtr::from_raw(raw), {data_.get() + ptr.offset() + kRecordHeaderBytes, ptr.row_size()}};
}

void RowBatch::scan(const std::function<std::size_t(RowBytes)>& measure,
                    const std::function<void(std::uint32_t, const BatchRecord&)>& fn) const {
    const auto end = size();
    std::uint32_t pos = 0;
    while (pos < end) {
        if (end - pos < kRecordHeaderBytes) {
            raise(ErrorCode::kCorruptPayload, "truncated record header in batch " + std::to_string(id_));
        }
        std::uint64_t raw;
        std::memcpy(&raw, data_.get() + pos, kRecordHeaderBytes);
        RowBytes rest{data_.get() + pos + kRecordHeaderBytes, end - pos - kRecordHeaderBytes};
        const auto len = measure(rest);
        fn(pos, BatchRecord{PackedRowPtr::from_raw(raw), rest.first(len)});
        pos += static_cast<std::uint32_t>(kRecordHeaderBytes + len);
    }
}

auto RowBatch::content_hash() const -> std::uint64_t {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (auto b : bytes()) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace ixframe
