#pragma once

#include <ixframe/plain_table.hpp>
#include <ixframe/types.hpp>

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ixframe {

enum class KeyDist { kUniform, kZipf, kSequential };

auto key_dist_name(KeyDist d) -> std::string_view;
auto parse_key_dist(std::string_view name) -> KeyDist;

/// Integer key draws, rendered in the key column's type (strings in base 36).
struct KeySpec {
    KeyDist dist = KeyDist::kUniform;
    std::int64_t lo = 0;        // uniform: [lo, hi]; sequential: first key; zipf: key of rank 1
    std::int64_t hi = 1000;
    double s = 1.0;             // zipf exponent
    std::uint64_t n = 1000;     // zipf support size
    ColumnType type = ColumnType::kInt64;
};

struct PayloadColumn {
    std::string name;
    ColumnType type = ColumnType::kInt64;
    double null_fraction = 0.0;  // > 0 makes the column nullable
    std::size_t width = 8;       // utf8 length
};

struct GenSpec {
    std::size_t row_count = 0;
    std::string key_name = "key";
    KeySpec key;
    std::vector<PayloadColumn> payload;
    std::uint64_t seed = 42;
};

/// Deterministic for a given spec. Throws InvalidSpec.
auto generate(const GenSpec& spec) -> PlainTable;
auto gen_schema(const GenSpec& spec) -> Schema;

/// Lower-case base 36, '-' prefix for negatives.
auto to_base36(std::int64_t v) -> std::string;

/// Uniform integer in [0, bound) from a 64-bit engine, independent of the
/// standard library's distribution implementations.
auto bounded(std::mt19937_64& rng, std::uint64_t bound) -> std::uint64_t;
/// Uniform double in [0, 1) with 53 random bits.
auto unit(std::mt19937_64& rng) -> double;

/// Zipf(s) over ranks 1..n by inverse CDF lookup.
class ZipfTable {
public:
    ZipfTable(std::uint64_t n, double s);
    /// Rank in [1, n].
    auto sample(std::mt19937_64& rng) const -> std::uint64_t;
    [[nodiscard]] auto probability(std::uint64_t rank) const -> double;

private:
    std::vector<double> cdf_;
};

/// Edge-like table: key (int64) with `rows_per_key` rows per key on
/// average, plus dst:int64 and weight:float64. 24-byte rows.
auto edge_spec(std::size_t rows, double rows_per_key, std::uint64_t seed) -> GenSpec;

}  // namespace ixframe
