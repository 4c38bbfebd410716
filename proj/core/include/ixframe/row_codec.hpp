#pragma once

#include <ixframe/types.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ixframe {

inline constexpr std::size_t kDefaultMaxRowBytes = 1024;

using RowBytes = std::span<const std::uint8_t>;
using RowPayload = std::vector<std::uint8_t>;

/// Encodes rows of one schema.
///
/// Layout of a payload (all integers little-endian):
///   [null bitmap]   ceil(k / 8) bytes, k = number of nullable columns; bit j
///                   set means the j-th nullable column is NULL
///   [fixed region]  every non-Utf8 column in schema order, 4 or 8 bytes
///                   each; NULL cells are zero-filled
///   [tail]          every Utf8 column in schema order as u16 length + bytes
///
/// The layout is self-delimiting, so `measure` can recover a payload's length
/// from its first bytes.
class RowCodec {
public:
    explicit RowCodec(Schema schema);

    [[nodiscard]] auto schema() const -> const Schema& { return schema_; }

    /// Appends the encoding of `values` to `out`. Throws TypeMismatch or
    /// RowTooLarge; `out` is restored on failure.
    void encode_into(std::span<const Value> values, std::vector<std::uint8_t>& out,
                     std::size_t max_row_bytes = kDefaultMaxRowBytes) const;
    [[nodiscard]] auto encode(std::span<const Value> values,
                              std::size_t max_row_bytes = kDefaultMaxRowBytes) const -> RowPayload;

    /// Throws CorruptPayload unless `bytes` is exactly one well-formed row.
    [[nodiscard]] auto decode(RowBytes bytes) const -> Row;
    void validate(RowBytes bytes) const;

    /// Length of the row that starts at bytes[0]; `bytes` may run past it.
    [[nodiscard]] auto measure(RowBytes bytes) const -> std::size_t;

    // Single-cell accessors. They assume a validated payload.
    [[nodiscard]] auto cell(RowBytes bytes, std::size_t col) const -> Value;
    [[nodiscard]] auto is_null(RowBytes bytes, std::size_t col) const -> bool;
    [[nodiscard]] auto int_cell(RowBytes bytes, std::size_t col) const -> std::int64_t;
    [[nodiscard]] auto float_cell(RowBytes bytes, std::size_t col) const -> double;
    [[nodiscard]] auto string_cell(RowBytes bytes, std::size_t col) const -> std::string_view;

    [[nodiscard]] auto min_size() const -> std::size_t { return bitmap_bytes_ + fixed_bytes_ + 2 * utf8_count_; }

    /// Appends the row `concat(l, r)` encoded under Schema::concat(left, right).
    static void concat_into(const RowCodec& left, RowBytes l, const RowCodec& right, RowBytes r,
                            std::vector<std::uint8_t>& out);

private:
    struct Slot {
        ColumnType type;
        int null_bit;        // -1 when the column is not nullable
        std::uint32_t fixed_offset;  // offset within the fixed region
        int utf8_ordinal;    // -1 unless Utf8
    };

    [[nodiscard]] auto tail_begin() const -> std::size_t { return bitmap_bytes_ + fixed_bytes_; }
    [[nodiscard]] auto bit_set(RowBytes bytes, int bit) const -> bool;

    Schema schema_;
    std::vector<Slot> slots_;
    std::size_t nullable_count_ = 0;
    std::size_t bitmap_bytes_ = 0;
    std::size_t fixed_bytes_ = 0;
    std::size_t utf8_count_ = 0;
};

auto encode_row(const Schema& schema, std::span<const Value> values,
                std::size_t max_row_bytes = kDefaultMaxRowBytes) -> RowPayload;
auto decode_row(const Schema& schema, RowBytes payload) -> Row;

}  // namespace ixframe
