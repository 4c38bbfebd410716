#pragma once

#include <cstdint>
#include <string>

namespace ixframe {

/// Dense 64-bit reference to a row inside a partition.
///
///   bits 63..33  batch id        (31 bits)
///   bits 32..11  byte offset     (22 bits, start of the record in its batch)
///   bits 10..0   payload size    (11 bits, length of the referenced row)
///
/// The all-ones value is reserved as "no predecessor". It decodes to offset
/// 2^22-1 with a non-empty payload, which can never fit in a batch of at most
/// 2^22 bytes, so it never collides with a real record.
class PackedRowPtr {
public:
    static constexpr unsigned kBatchBits = 31;
    static constexpr unsigned kOffsetBits = 22;
    static constexpr unsigned kSizeBits = 11;

    static constexpr std::uint64_t kMaxBatchId = (std::uint64_t{1} << kBatchBits) - 1;
    static constexpr std::uint64_t kMaxOffset = (std::uint64_t{1} << kOffsetBits) - 1;
    static constexpr std::uint64_t kMaxSize = (std::uint64_t{1} << kSizeBits) - 1;

    constexpr PackedRowPtr() = default;

    /// Throws FieldOverflow if any field exceeds its width.
    static auto pack(std::uint64_t batch_id, std::uint64_t offset_bytes, std::uint64_t row_size_bytes)
        -> PackedRowPtr;

    static constexpr auto from_raw(std::uint64_t raw) -> PackedRowPtr { return PackedRowPtr(raw); }
    static constexpr auto none() -> PackedRowPtr { return PackedRowPtr(~std::uint64_t{0}); }

    [[nodiscard]] constexpr auto raw() const -> std::uint64_t { return raw_; }
    [[nodiscard]] constexpr auto is_none() const -> bool { return raw_ == ~std::uint64_t{0}; }
    [[nodiscard]] constexpr auto batch_id() const -> std::uint32_t {
        return static_cast<std::uint32_t>(raw_ >> (kOffsetBits + kSizeBits));
    }
    [[nodiscard]] constexpr auto offset() const -> std::uint32_t {
        return static_cast<std::uint32_t>((raw_ >> kSizeBits) & kMaxOffset);
    }
    [[nodiscard]] constexpr auto row_size() const -> std::uint32_t {
        return static_cast<std::uint32_t>(raw_ & kMaxSize);
    }

    friend constexpr auto operator==(PackedRowPtr, PackedRowPtr) -> bool = default;

private:
    constexpr explicit PackedRowPtr(std::uint64_t raw) : raw_(raw) {}

    std::uint64_t raw_ = 0;
};

auto to_string(PackedRowPtr ptr) -> std::string;

}  // namespace ixframe
