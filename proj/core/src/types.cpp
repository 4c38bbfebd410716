#include <ixframe/types.hpp>

#include <ixframe/error.hpp>

#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace ixframe {

auto column_type_name(ColumnType type) -> std::string_view {
    switch (type) {
        case ColumnType::kInt32: return "int32";
        case ColumnType::kInt64: return "int64";
        case ColumnType::kFloat64: return "float64";
        case ColumnType::kUtf8: return "utf8";
    }
    return "unknown";
}

auto parse_column_type(std::string_view name) -> ColumnType {
    if (name == "int32") return ColumnType::kInt32;
    if (name == "int64") return ColumnType::kInt64;
    if (name == "float64") return ColumnType::kFloat64;
    if (name == "utf8" || name == "string") return ColumnType::kUtf8;
    raise(ErrorCode::kInvalidSchema, "unknown column type '" + std::string(name) + "'");
}

auto is_null(const Value& v) -> bool {
    return std::holds_alternative<std::monostate>(v);
}

auto value_has_type(const Value& v, ColumnType type) -> bool {
    switch (type) {
        case ColumnType::kInt32: return std::holds_alternative<std::int32_t>(v);
        case ColumnType::kInt64: return std::holds_alternative<std::int64_t>(v);
        case ColumnType::kFloat64: return std::holds_alternative<double>(v);
        case ColumnType::kUtf8: return std::holds_alternative<std::string>(v);
    }
    return false;
}

auto coerce_value(const Value& v, ColumnType type) -> Value {
    if (is_null(v) || value_has_type(v, type)) {
        return v;
    }
    auto as_int = [&]() -> std::optional<std::int64_t> {
        if (const auto* i = std::get_if<std::int32_t>(&v)) return *i;
        if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
        if (const auto* d = std::get_if<double>(&v)) {
            if (std::trunc(*d) == *d && std::abs(*d) < 9.0e18) {
                return static_cast<std::int64_t>(*d);
            }
        }
        return std::nullopt;
    };
    switch (type) {
        case ColumnType::kInt32:
            if (auto i = as_int(); i && *i >= std::numeric_limits<std::int32_t>::min() &&
                                   *i <= std::numeric_limits<std::int32_t>::max()) {
                return static_cast<std::int32_t>(*i);
            }
            break;
        case ColumnType::kInt64:
            if (auto i = as_int()) return *i;
            break;
        case ColumnType::kFloat64:
            if (const auto* i = std::get_if<std::int32_t>(&v)) return static_cast<double>(*i);
            if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
            break;
        case ColumnType::kUtf8:
            break;
    }
    raise(ErrorCode::kTypeMismatch,
          "cannot convert " + format_value(v) + " to " + std::string(column_type_name(type)));
}

auto same_value(const Value& a, const Value& b) -> bool {
    if (a.index() != b.index()) return false;
    if (const auto* da = std::get_if<double>(&a)) {
        return std::bit_cast<std::uint64_t>(*da) == std::bit_cast<std::uint64_t>(std::get<double>(b));
    }
    return a == b;
}

auto format_value(const Value& v) -> std::string {
    struct Visitor {
        auto operator()(std::monostate) const -> std::string { return "NULL"; }
        auto operator()(std::int32_t i) const -> std::string { return std::to_string(i); }
        auto operator()(std::int64_t i) const -> std::string { return std::to_string(i); }
        auto operator()(double d) const -> std::string {
            char buf[64];
            auto res = std::to_chars(buf, buf + sizeof(buf), d);
            return std::string(buf, res.ptr);
        }
        auto operator()(const std::string& s) const -> std::string { return s; }
    };
    return std::visit(Visitor{}, v);
}

auto is_valid_utf8(std::string_view s) -> bool {
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        // overlong forms, surrogates, out of range
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return false;
        }
        i += len;
    }
    return true;
}

Schema::Schema(std::vector<Column> columns, std::optional<std::size_t> index_col)
    : columns_(std::move(columns)), index_col_(index_col) {
    std::unordered_set<std::string_view> seen;
    for (const auto& c : columns_) {
        if (c.name.empty()) {
            raise(ErrorCode::kInvalidSchema, "column names must be non-empty");
        }
        if (!seen.insert(c.name).second) {
            raise(ErrorCode::kInvalidSchema, "duplicate column name '" + c.name + "'");
        }
    }
    if (index_col_ && *index_col_ >= columns_.size()) {
        raise(ErrorCode::kInvalidSchema, "index column " + std::to_string(*index_col_) + " out of range");
    }
}

auto Schema::find(std::string_view name) const -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name == name) return i;
    }
    return std::nullopt;
}

auto Schema::with_index(std::optional<std::size_t> col) const -> Schema {
    return Schema(columns_, col);
}

auto Schema::concat(const Schema& left, const Schema& right) -> Schema {
    std::vector<Column> cols = left.columns_;
    std::unordered_set<std::string> names;
    for (const auto& c : cols) names.insert(c.name);
    for (auto c : right.columns_) {
        while (names.count(c.name) != 0) {
            c.name += "_r";
        }
        names.insert(c.name);
        cols.push_back(std::move(c));
    }
    return Schema(std::move(cols));
}

auto format_schema(const Schema& schema) -> std::string {
    std::string out = "(";
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (i > 0) out += ", ";
        const auto& c = schema.column(i);
        out += c.name;
        out += ':';
        out += column_type_name(c.type);
        if (c.nullable) out += '?';
        if (schema.index_col() == i) out += '*';
    }
    out += ')';
    return out;
}

}  // namespace ixframe
