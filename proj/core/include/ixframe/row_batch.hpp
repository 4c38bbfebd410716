#pragma once

#include <ixframe/packed_ptr.hpp>
#include <ixframe/row_codec.hpp>

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>

namespace ixframe {

inline constexpr std::size_t kRecordHeaderBytes = 8;
inline constexpr std::uint32_t kDefaultBatchBytes = 4u << 20;
inline constexpr std::uint32_t kMaxBatchBytes = 1u << PackedRowPtr::kOffsetBits;

struct BatchRecord {
    PackedRowPtr backward;
    RowBytes payload;
};

/// Fixed-capacity byte arena. Records are stored back to back as
/// [8-byte backward pointer][payload].
///
/// One writer at a time. Readers may run concurrently with the writer as long
/// as they only touch records whose append has already returned (the write
/// cursor is published with release semantics).
class RowBatch {
public:
    RowBatch(std::uint32_t id, std::uint32_t capacity_bytes);

    RowBatch(const RowBatch&) = delete;
    auto operator=(const RowBatch&) -> RowBatch& = delete;

    /// Unsealed copy with the same id and the records written so far.
    [[nodiscard]] auto clone_unsealed() const -> std::unique_ptr<RowBatch>;

    [[nodiscard]] auto id() const -> std::uint32_t { return id_; }
    [[nodiscard]] auto capacity() const -> std::uint32_t { return capacity_; }
    [[nodiscard]] auto size() const -> std::uint32_t { return cursor_.load(std::memory_order_acquire); }
    [[nodiscard]] auto remaining() const -> std::uint32_t { return capacity_ - size(); }
    [[nodiscard]] auto sealed() const -> bool { return sealed_.load(std::memory_order_acquire); }
    void seal() { sealed_.store(true, std::memory_order_release); }

    [[nodiscard]] auto fits(std::size_t payload_bytes) const -> bool {
        return kRecordHeaderBytes + payload_bytes <= remaining();
    }

    /// Returns the record offset, or nullopt when the record does not fit.
    /// Throws BatchSealed.
    auto try_append(PackedRowPtr backward, RowBytes payload) -> std::optional<std::uint32_t>;
    /// Like try_append but throws BatchFull.
    auto append(PackedRowPtr backward, RowBytes payload) -> std::uint32_t;

    /// Throws OutOfBounds if `ptr` does not reference a record of this batch.
    [[nodiscard]] auto read(PackedRowPtr ptr) const -> BatchRecord;

    /// Visits records in append order. `measure` returns the payload length
    /// of the row starting at the given bytes.
    void scan(const std::function<std::size_t(RowBytes)>& measure,
              const std::function<void(std::uint32_t offset, const BatchRecord&)>& fn) const;

    [[nodiscard]] auto bytes() const -> std::span<const std::uint8_t> { return {data_.get(), size()}; }

    /// FNV-1a over the written bytes.
    [[nodiscard]] auto content_hash() const -> std::uint64_t;

private:
    std::uint32_t id_;
    std::uint32_t capacity_;
    std::atomic<std::uint32_t> cursor_{0};
    std::atomic<bool> sealed_{false};
    std::unique_ptr<std::uint8_t[]> data_;
};

}  // namespace ixframe
