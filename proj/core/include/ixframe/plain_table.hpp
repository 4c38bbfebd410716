#pragma once

#include <ixframe/row_codec.hpp>
#include <ixframe/types.hpp>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

namespace ixframe {

/// A regular (non-indexed) table: encoded rows packed into one arena.
class PlainTable {
public:
    PlainTable();
    explicit PlainTable(Schema schema);

    static auto from_rows(Schema schema, const std::vector<Row>& rows) -> PlainTable;

    [[nodiscard]] auto schema() const -> const Schema& { return codec_->schema(); }
    [[nodiscard]] auto codec() const -> const RowCodec& { return *codec_; }
    [[nodiscard]] auto shared_codec() const -> const std::shared_ptr<const RowCodec>& { return codec_; }

    [[nodiscard]] auto size() const -> std::size_t { return offsets_.size() - 1; }
    [[nodiscard]] auto empty() const -> bool { return size() == 0; }
    [[nodiscard]] auto row(std::size_t i) const -> RowBytes {
        return {arena_.data() + offsets_[i], static_cast<std::size_t>(offsets_[i + 1] - offsets_[i])};
    }
    [[nodiscard]] auto decode(std::size_t i) const -> Row { return codec_->decode(row(i)); }
    /// Sum of payload bytes.
    [[nodiscard]] auto byte_size() const -> std::size_t { return arena_.size(); }

    void add_row(std::span<const Value> values,
                 std::size_t max_row_bytes = std::numeric_limits<std::size_t>::max());
    /// Validates the payload against the schema.
    void add_payload(RowBytes payload);
    /// For producers that build payloads with this table's codec.
    void add_payload_unchecked(RowBytes payload);
    /// Encodes directly into the arena via `write`, which appends to the
    /// vector it is given.
    template <class F>
    void emplace_encoded(F&& write) {
        write(arena_);
        offsets_.push_back(arena_.size());
    }

    void reserve(std::size_t rows, std::size_t bytes);
    void append_table(const PlainTable& other);

    /// Same rows under a schema with identical columns (e.g. a different
    /// index column). Throws SchemaMismatch otherwise.
    [[nodiscard]] auto with_schema(Schema schema) const -> PlainTable;

    /// Rows as owned byte strings, sorted; handy for multiset comparisons.
    [[nodiscard]] auto sorted_payloads() const -> std::vector<RowPayload>;

    [[nodiscard]] auto rows() const -> std::vector<Row>;

private:
    std::shared_ptr<const RowCodec> codec_;
    std::vector<std::uint8_t> arena_;
    std::vector<std::uint64_t> offsets_{0};
};

}  // namespace ixframe
