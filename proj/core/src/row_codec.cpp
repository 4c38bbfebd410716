#include <ixframe/row_codec.hpp>

#include <ixframe/error.hpp>

#include <algorithm>
#include <bit>
#include <cstring>

namespace ixframe {

namespace {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T v) {
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(buf, buf + sizeof(T));
    }
    out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
auto get_le(const std::uint8_t* p) -> T {
    T v;
    std::memcpy(&v, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        auto* b = reinterpret_cast<std::uint8_t*>(&v);
        std::reverse(b, b + sizeof(T));
    }
    return v;
}

}  // namespace

RowCodec::RowCodec(Schema schema) : schema_(std::move(schema)) {
    slots_.reserve(schema_.size());
    for (const auto& c : schema_.columns()) {
        Slot slot{c.type, -1, 0, -1};
        if (c.nullable) {
            slot.null_bit = static_cast<int>(nullable_count_++);
        }
        if (c.type == ColumnType::kUtf8) {
            slot.utf8_ordinal = static_cast<int>(utf8_count_++);
        } else {
            slot.fixed_offset = static_cast<std::uint32_t>(fixed_bytes_);
            fixed_bytes_ += fixed_width(c.type);
        }
        slots_.push_back(slot);
    }
    bitmap_bytes_ = (nullable_count_ + 7) / 8;
}

void RowCodec::encode_into(std::span<const Value> values, std::vector<std::uint8_t>& out,
                           std::size_t max_row_bytes) const {
    if (values.size() != slots_.size()) {
        raise(ErrorCode::kTypeMismatch, "row has " + std::to_string(values.size()) + " cells, schema has " +
                                            std::to_string(slots_.size()));
    }
    const std::size_t start = out.size();
    std::size_t total = min_size();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& v = values[i];
        const auto& slot = slots_[i];
        if (ixframe::is_null(v)) {
            if (slot.null_bit < 0) {
                raise(ErrorCode::kTypeMismatch, "NULL in non-nullable column '" + schema_.column(i).name + "'");
            }
            continue;
        }
        if (!value_has_type(v, slot.type)) {
            raise(ErrorCode::kTypeMismatch, "column '" + schema_.column(i).name + "' expects " +
                                                std::string(column_type_name(slot.type)));
        }
        if (slot.type == ColumnType::kUtf8) {
            const auto& s = std::get<std::string>(v);
            if (s.size() > 0xFFFF) {
                raise(ErrorCode::kRowTooLarge, "string cell longer than 65535 bytes");
            }
            if (!is_valid_utf8(s)) {
                raise(ErrorCode::kTypeMismatch, "column '" + schema_.column(i).name + "' holds invalid UTF-8");
            }
            total += s.size();
        }
    }
    if (total > max_row_bytes) {
        raise(ErrorCode::kRowTooLarge,
              "encoded row is " + std::to_string(total) + " bytes, limit " + std::to_string(max_row_bytes));
    }

    out.resize(start + tail_begin(), 0);
    std::uint8_t* base = out.data() + start;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& v = values[i];
        const auto& slot = slots_[i];
        if (ixframe::is_null(v)) {
            base[slot.null_bit / 8] |= static_cast<std::uint8_t>(1u << (slot.null_bit % 8));
            continue;
        }
        std::uint8_t* dst = base + bitmap_bytes_ + slot.fixed_offset;
        switch (slot.type) {
            case ColumnType::kInt32: {
                auto x = std::get<std::int32_t>(v);
                std::memcpy(dst, &x, 4);
                break;
            }
            case ColumnType::kInt64: {
                auto x = std::get<std::int64_t>(v);
                std::memcpy(dst, &x, 8);
                break;
            }
            case ColumnType::kFloat64: {
                auto x = std::get<double>(v);
                std::memcpy(dst, &x, 8);
                break;
            }
            case ColumnType::kUtf8:
                break;
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (slots_[i].type != ColumnType::kUtf8) continue;
        const auto* s = std::get_if<std::string>(&values[i]);
        const auto len = static_cast<std::uint16_t>(s ? s->size() : 0);
        put_le<std::uint16_t>(out, len);
        if (s) out.insert(out.end(), s->begin(), s->end());
    }
}

auto RowCodec::encode(std::span<const Value> values, std::size_t max_row_bytes) const -> RowPayload {
    RowPayload out;
    encode_into(values, out, max_row_bytes);
    return out;
}

auto RowCodec::measure(RowBytes bytes) const -> std::size_t {
    std::size_t pos = tail_begin();
    if (bytes.size() < pos) {
        raise(ErrorCode::kCorruptPayload, "payload shorter than fixed region");
    }
    for (std::size_t k = 0; k < utf8_count_; ++k) {
        if (pos + 2 > bytes.size()) {
            raise(ErrorCode::kCorruptPayload, "truncated string length");
        }
        pos += 2 + get_le<std::uint16_t>(bytes.data() + pos);
        if (pos > bytes.size()) {
            raise(ErrorCode::kCorruptPayload, "truncated string body");
        }
    }
    return pos;
}

void RowCodec::validate(RowBytes bytes) const {
    if (measure(bytes) != bytes.size()) {
        raise(ErrorCode::kCorruptPayload, "trailing bytes after row");
    }
    if (nullable_count_ % 8 != 0 && bitmap_bytes_ > 0) {
        auto last = bytes[bitmap_bytes_ - 1];
        if ((last >> (nullable_count_ % 8)) != 0) {
            raise(ErrorCode::kCorruptPayload, "stray bits in null bitmap");
        }
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i].type == ColumnType::kUtf8 && !is_valid_utf8(string_cell(bytes, i))) {
            raise(ErrorCode::kCorruptPayload, "invalid UTF-8 in column '" + schema_.column(i).name + "'");
        }
    }
}

auto RowCodec::decode(RowBytes bytes) const -> Row {
    validate(bytes);
    Row row;
    row.reserve(slots_.size());
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        row.push_back(cell(bytes, i));
    }
    return row;
}

auto RowCodec::bit_set(RowBytes bytes, int bit) const -> bool {
    return bit >= 0 && ((bytes[static_cast<std::size_t>(bit) / 8] >> (bit % 8)) & 1u) != 0;
}

auto RowCodec::is_null(RowBytes bytes, std::size_t col) const -> bool {
    return bit_set(bytes, slots_[col].null_bit);
}

auto RowCodec::int_cell(RowBytes bytes, std::size_t col) const -> std::int64_t {
    const auto& slot = slots_[col];
    const auto* p = bytes.data() + bitmap_bytes_ + slot.fixed_offset;
    if (slot.type == ColumnType::kInt32) return get_le<std::int32_t>(p);
    return get_le<std::int64_t>(p);
}

auto RowCodec::float_cell(RowBytes bytes, std::size_t col) const -> double {
    return get_le<double>(bytes.data() + bitmap_bytes_ + slots_[col].fixed_offset);
}

auto RowCodec::string_cell(RowBytes bytes, std::size_t col) const -> std::string_view {
    const int ordinal = slots_[col].utf8_ordinal;
    std::size_t pos = tail_begin();
    for (int k = 0; k < ordinal; ++k) {
        pos += 2 + get_le<std::uint16_t>(bytes.data() + pos);
    }
    const auto len = get_le<std::uint16_t>(bytes.data() + pos);
    return {reinterpret_cast<const char*>(bytes.data() + pos + 2), len};
}

auto RowCodec::cell(RowBytes bytes, std::size_t col) const -> Value {
    if (is_null(bytes, col)) return std::monostate{};
    switch (slots_[col].type) {
        case ColumnType::kInt32: return static_cast<std::int32_t>(int_cell(bytes, col));
        case ColumnType::kInt64: return int_cell(bytes, col);
        case ColumnType::kFloat64: return float_cell(bytes, col);
        case ColumnType::kUtf8: return std::string(string_cell(bytes, col));
    }
    return std::monostate{};
}

void RowCodec::concat_into(const RowCodec& left, RowBytes l, const RowCodec& right, RowBytes r,
                           std::vector<std::uint8_t>& out) {
    const std::size_t nulls = left.nullable_count_ + right.nullable_count_;
    const std::size_t bitmap = (nulls + 7) / 8;
    const std::size_t start = out.size();
    out.resize(start + bitmap, 0);
    if (nulls > 0) {
        std::uint8_t* bm = out.data() + start;
        for (std::size_t b = 0; b < left.nullable_count_; ++b) {
            if ((l[b / 8] >> (b % 8)) & 1u) bm[b / 8] |= static_cast<std::uint8_t>(1u << (b % 8));
        }
        for (std::size_t b = 0; b < right.nullable_count_; ++b) {
            if ((r[b / 8] >> (b % 8)) & 1u) {
                const std::size_t dst = left.nullable_count_ + b;
                bm[dst / 8] |= static_cast<std::uint8_t>(1u << (dst % 8));
            }
        }
    }
    out.insert(out.end(), l.begin() + static_cast<std::ptrdiff_t>(left.bitmap_bytes_),
               l.begin() + static_cast<std::ptrdiff_t>(left.tail_begin()));
    out.insert(out.end(), r.begin() + static_cast<std::ptrdiff_t>(right.bitmap_bytes_),
               r.begin() + static_cast<std::ptrdiff_t>(right.tail_begin()));
    out.insert(out.end(), l.begin() + static_cast<std::ptrdiff_t>(left.tail_begin()), l.end());
    out.insert(out.end(), r.begin() + static_cast<std::ptrdiff_t>(right.tail_begin()), r.end());
}

auto encode_row(const Schema& schema, std::span<const Value> values, std::size_t max_row_bytes) -> RowPayload {
    return RowCodec(schema).encode(values, max_row_bytes);
}

auto decode_row(const Schema& schema, RowBytes payload) -> Row {
    return RowCodec(schema).decode(payload);
}

}  // namespace ixframe
