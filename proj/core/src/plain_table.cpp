#include <ixframe/plain_table.hpp>

#include <ixframe/error.hpp>

#include <algorithm>

namespace ixframe {

PlainTable::PlainTable() : codec_(std::make_shared<const RowCodec>(Schema())) {}

PlainTable::PlainTable(Schema schema) : codec_(std::make_shared<const RowCodec>(std::move(schema))) {}

auto PlainTable::from_rows(Schema schema, const std::vector<Row>& rows) -> PlainTable {
    PlainTable t(std::move(schema));
    for (const auto& r : rows) t.add_row(r);
    return t;
}

void PlainTable::add_row(std::span<const Value> values, std::size_t max_row_bytes) {
    codec_->encode_into(values, arena_, max_row_bytes);
    offsets_.push_back(arena_.size());
}

void PlainTable::add_payload(RowBytes payload) {
    codec_->validate(payload);
    add_payload_unchecked(payload);
}

void PlainTable::add_payload_unchecked(RowBytes payload) {
    arena_.insert(arena_.end(), payload.begin(), payload.end());
    offsets_.push_back(arena_.size());
}

void PlainTable::reserve(std::size_t rows, std::size_t bytes) {
    offsets_.reserve(offsets_.size() + rows);
    arena_.reserve(arena_.size() + bytes);
}

void PlainTable::append_table(const PlainTable& other) {
    if (!schema().same_columns(other.schema())) {
        raise(ErrorCode::kSchemaMismatch, format_schema(other.schema()) + " vs " + format_schema(schema()));
    }
    const auto base = arena_.size();
    arena_.insert(arena_.end(), other.arena_.begin(), other.arena_.end());
    offsets_.reserve(offsets_.size() + other.size());
    for (std::size_t i = 1; i < other.offsets_.size(); ++i) {
        offsets_.push_back(base + other.offsets_[i]);
    }
}

auto PlainTable::with_schema(Schema schema) const -> PlainTable {
    if (!schema.same_columns(this->schema())) {
        raise(ErrorCode::kSchemaMismatch, format_schema(schema) + " vs " + format_schema(this->schema()));
    }
    PlainTable t(std::move(schema));
    t.arena_ = arena_;
    t.offsets_ = offsets_;
    return t;
}

auto PlainTable::sorted_payloads() const -> std::vector<RowPayload> {
    std::vector<RowPayload> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
        auto r = row(i);
        out.emplace_back(r.begin(), r.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

auto PlainTable::rows() const -> std::vector<Row> {
    std::vector<Row> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(decode(i));
    return out;
}

}  // namespace ixframe
