#include <ixframe/canonical_key.hpp>

#include <ixframe/error.hpp>

#include <bit>

namespace ixframe {

auto string_key_hash(std::string_view s) -> std::uint32_t {
    std::uint32_t h = 0x811c9dc5u;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x01000193u;
    }
    return h;
}

auto float_key_bits(double d) -> std::uint64_t {
    auto bits = std::bit_cast<std::uint64_t>(d);
    return (bits >> 63) != 0 ? ~bits : bits | (std::uint64_t{1} << 63);
}

auto canonical_key(const Value& v) -> CanonicalKey {
    if (const auto* i = std::get_if<std::int32_t>(&v)) return {static_cast<std::uint64_t>(std::int64_t{*i})};
    if (const auto* i = std::get_if<std::int64_t>(&v)) return {static_cast<std::uint64_t>(*i)};
    if (const auto* d = std::get_if<double>(&v)) return {float_key_bits(*d)};
    if (const auto* s = std::get_if<std::string>(&v)) return {string_key_hash(*s)};
    raise(ErrorCode::kTypeMismatch, "NULL cannot be used as an index key");
}

auto canonical_key(const RowCodec& codec, RowBytes row, std::size_t col) -> CanonicalKey {
    switch (codec.schema().column(col).type) {
        case ColumnType::kInt32:
        case ColumnType::kInt64: return {static_cast<std::uint64_t>(codec.int_cell(row, col))};
        case ColumnType::kFloat64: return {float_key_bits(codec.float_cell(row, col))};
        case ColumnType::kUtf8: return {string_key_hash(codec.string_cell(row, col))};
    }
    return {};
}

auto partition_of(CanonicalKey key, std::size_t partitions) -> std::size_t {
    // murmur3 fmix64; deliberately different from the trie's mixer so that
    // keys of one partition still spread over the trie's first level.
    std::uint64_t h = key.raw;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ull;
    h ^= h >> 33;
    return static_cast<std::size_t>(h % partitions);
}

}  // namespace ixframe
