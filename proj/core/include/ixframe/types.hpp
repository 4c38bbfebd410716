#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ixframe {

enum class ColumnType : std::uint8_t {
    kInt32 = 0,
    kInt64 = 1,
    kFloat64 = 2,
    kUtf8 = 3,
};

auto column_type_name(ColumnType type) -> std::string_view;
auto parse_column_type(std::string_view name) -> ColumnType;

/// Width in the fixed region of an encoded row; 0 for variable-length types.
constexpr auto fixed_width(ColumnType type) -> std::size_t {
    switch (type) {
        case ColumnType::kInt32: return 4;
        case ColumnType::kInt64: return 8;
        case ColumnType::kFloat64: return 8;
        case ColumnType::kUtf8: return 0;
    }
    return 0;
}

/// A single typed cell. `std::monostate` is SQL NULL.
using Value = std::variant<std::monostate, std::int32_t, std::int64_t, double, std::string>;
using Row = std::vector<Value>;

auto is_null(const Value& v) -> bool;
auto value_has_type(const Value& v, ColumnType type) -> bool;

/// Converts a loosely typed value (e.g. an int64 literal from JSON) to the
/// representation of `type`. Throws TypeMismatch when no lossless conversion
/// exists.
auto coerce_value(const Value& v, ColumnType type) -> Value;

/// Bitwise identity for cells (doubles compare by bit pattern).
auto same_value(const Value& a, const Value& b) -> bool;

auto format_value(const Value& v) -> std::string;

auto is_valid_utf8(std::string_view s) -> bool;

struct Column {
    std::string name;
    ColumnType type = ColumnType::kInt64;
    bool nullable = false;

    friend auto operator==(const Column&, const Column&) -> bool = default;
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<Column> columns, std::optional<std::size_t> index_col = std::nullopt);

    [[nodiscard]] auto columns() const -> const std::vector<Column>& { return columns_; }
    [[nodiscard]] auto size() const -> std::size_t { return columns_.size(); }
    [[nodiscard]] auto empty() const -> bool { return columns_.empty(); }
    [[nodiscard]] auto column(std::size_t i) const -> const Column& { return columns_.at(i); }
    [[nodiscard]] auto find(std::string_view name) const -> std::optional<std::size_t>;
    [[nodiscard]] auto index_col() const -> std::optional<std::size_t> { return index_col_; }

    [[nodiscard]] auto with_index(std::optional<std::size_t> col) const -> Schema;

    /// Columns of `left` followed by `right`. Names that collide get a `_r`
    /// suffix (repeated until unique). The result carries no index column.
    static auto concat(const Schema& left, const Schema& right) -> Schema;

    /// Same columns and types, ignoring the index column.
    [[nodiscard]] auto same_columns(const Schema& other) const -> bool { return columns_ == other.columns_; }

    friend auto operator==(const Schema&, const Schema&) -> bool = default;

private:
    std::vector<Column> columns_;
    std::optional<std::size_t> index_col_;
};

auto format_schema(const Schema& schema) -> std::string;

}  // namespace ixframe
