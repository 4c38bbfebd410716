#pragma once

#include <ixframe/row_codec.hpp>
#include <ixframe/types.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace ixframe {

/// 64-bit index key derived from a cell:
///   Int32/Int64  sign-extended value
///   Float64      total-order bit pattern (so -0.0, 0.0 and NaNs are distinct keys)
///   Utf8         32-bit FNV-1a hash, zero-extended; collisions are resolved by
///                comparing the stored string
struct CanonicalKey {
    std::uint64_t raw = 0;

    friend constexpr auto operator<=>(CanonicalKey, CanonicalKey) = default;
};

auto string_key_hash(std::string_view s) -> std::uint32_t;
auto float_key_bits(double d) -> std::uint64_t;

/// Throws TypeMismatch for NULL.
auto canonical_key(const Value& v) -> CanonicalKey;
/// Key of a non-NULL cell of an encoded row.
auto canonical_key(const RowCodec& codec, RowBytes row, std::size_t col) -> CanonicalKey;

/// A key together with the string it was derived from, when there is one.
struct KeyProbe {
    CanonicalKey key;
    std::optional<std::string_view> verify;
};

/// Hash partition that owns `key` among `partitions`.
auto partition_of(CanonicalKey key, std::size_t partitions) -> std::size_t;

}  // namespace ixframe
