#include <ixframe/datagen.hpp>

#include <ixframe/error.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ixframe {

auto key_dist_name(KeyDist d) -> std::string_view {
    switch (d) {
        case KeyDist::kUniform: return "uniform";
        case KeyDist::kZipf: return "zipf";
        case KeyDist::kSequential: return "sequential";
    }
    return "?";
}

auto parse_key_dist(std::string_view name) -> KeyDist {
    if (name == "uniform") return KeyDist::kUniform;
    if (name == "zipf") return KeyDist::kZipf;
    if (name == "sequential") return KeyDist::kSequential;
    raise(ErrorCode::kInvalidSpec, "unknown key distribution '" + std::string(name) + "'");
}

auto to_base36(std::int64_t v) -> std::string {
    static constexpr char kDigits[] = "0123456789abcdefghijklmnopqrstuvwxyz";
    const bool neg = v < 0;
    auto u = neg ? ~static_cast<std::uint64_t>(v) + 1 : static_cast<std::uint64_t>(v);
    std::string out;
    do {
        out.push_back(kDigits[u % 36]);
        u /= 36;
    } while (u != 0);
    if (neg) out.push_back('-');
    std::reverse(out.begin(), out.end());
    return out;
}

auto bounded(std::mt19937_64& rng, std::uint64_t bound) -> std::uint64_t {
    if (bound == 0) return rng();
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
        const auto x = rng();
        if (x < limit) return x % bound;
    }
}

auto unit(std::mt19937_64& rng) -> double {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ZipfTable::ZipfTable(std::uint64_t n, double s) {
    if (n == 0 || n > (1ull << 27)) raise(ErrorCode::kInvalidSpec, "zipf support must be in [1, 2^27]");
    if (!(s > 0.0) || !std::isfinite(s)) raise(ErrorCode::kInvalidSpec, "zipf exponent must be positive");
    cdf_.resize(n);
    double acc = 0.0;
    for (std::uint64_t k = 1; k <= n; ++k) {
        acc += std::pow(static_cast<double>(k), -s);
        cdf_[k - 1] = acc;
    }
    for (auto& c : cdf_) c /= acc;
    cdf_.back() = 1.0;
}

auto ZipfTable::sample(std::mt19937_64& rng) const -> std::uint64_t {
    const double u = unit(rng);
    return static_cast<std::uint64_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin()) + 1;
}

auto ZipfTable::probability(std::uint64_t rank) const -> double {
    if (rank == 0 || rank > cdf_.size()) return 0.0;
    return rank == 1 ? cdf_[0] : cdf_[rank - 1] - cdf_[rank - 2];
}

auto gen_schema(const GenSpec& spec) -> Schema {
    std::vector<Column> cols{{spec.key_name, spec.key.type, false}};
    for (const auto& p : spec.payload) cols.push_back({p.name, p.type, p.null_fraction > 0.0});
    try {
        return Schema(std::move(cols));
    } catch (const Error& e) {
        raise(ErrorCode::kInvalidSpec, e.what());
    }
}

namespace {

auto render_key(std::int64_t k, ColumnType type) -> Value {
    switch (type) {
        case ColumnType::kInt32:
            if (k < std::numeric_limits<std::int32_t>::min() || k > std::numeric_limits<std::int32_t>::max()) {
                raise(ErrorCode::kInvalidSpec, "key " + std::to_string(k) + " does not fit int32");
            }
            return static_cast<std::int32_t>(k);
        case ColumnType::kInt64: return k;
        case ColumnType::kFloat64: return static_cast<double>(k);
        case ColumnType::kUtf8: return to_base36(k);
    }
    return k;
}

auto payload_value(std::mt19937_64& rng, const PayloadColumn& c) -> Value {
    if (c.null_fraction > 0.0 && unit(rng) < c.null_fraction) return std::monostate{};
    switch (c.type) {
        case ColumnType::kInt32: return static_cast<std::int32_t>(static_cast<std::uint32_t>(rng()));
        case ColumnType::kInt64: return static_cast<std::int64_t>(bounded(rng, 1ull << 40));
        case ColumnType::kFloat64: return unit(rng) * 1000.0;
        case ColumnType::kUtf8: {
            std::string s(c.width, 'a');
            for (auto& ch : s) ch = "0123456789abcdefghijklmnopqrstuvwxyz"[bounded(rng, 36)];
            return s;
        }
    }
    return std::monostate{};
}

}  // namespace

auto generate(const GenSpec& spec) -> PlainTable {
    const auto& k = spec.key;
    if (k.dist == KeyDist::kUniform && k.lo > k.hi) raise(ErrorCode::kInvalidSpec, "uniform key range is empty");
    for (const auto& p : spec.payload) {
        if (!(p.null_fraction >= 0.0 && p.null_fraction < 1.0)) {
            raise(ErrorCode::kInvalidSpec, "null fraction of '" + p.name + "' must be in [0, 1)");
        }
        if (p.type == ColumnType::kUtf8 && p.width > 1000) {
            raise(ErrorCode::kInvalidSpec, "string width of '" + p.name + "' exceeds 1000");
        }
    }
    auto schema = gen_schema(spec);
    std::optional<ZipfTable> zipf;
    if (k.dist == KeyDist::kZipf) zipf.emplace(k.n, k.s);

    std::mt19937_64 rng(spec.seed);
    PlainTable out(schema);
    std::size_t width = 0;
    for (const auto& c : schema.columns()) width += c.type == ColumnType::kUtf8 ? 12 : fixed_width(c.type);
    out.reserve(spec.row_count, spec.row_count * width);
    const auto span = static_cast<std::uint64_t>(k.hi) - static_cast<std::uint64_t>(k.lo) + 1;
    Row row(schema.size());
    for (std::size_t i = 0; i < spec.row_count; ++i) {
        std::int64_t key = 0;
        switch (k.dist) {
            case KeyDist::kUniform:
                // span wraps to 0 only for the full int64 range.
                key = static_cast<std::int64_t>(static_cast<std::uint64_t>(k.lo) + (span == 0 ? rng() : bounded(rng, span)));
                break;
            case KeyDist::kZipf:
                key = k.lo + static_cast<std::int64_t>(zipf->sample(rng) - 1);
                break;
            case KeyDist::kSequential:
                key = k.lo + static_cast<std::int64_t>(i);
                break;
        }
        row[0] = render_key(key, k.type);
        for (std::size_t c = 0; c < spec.payload.size(); ++c) row[c + 1] = payload_value(rng, spec.payload[c]);
        out.add_row(row);
    }
    return out;
}

auto edge_spec(std::size_t rows, double rows_per_key, std::uint64_t seed) -> GenSpec {
    GenSpec spec;
    spec.row_count = rows;
    spec.key_name = "src";
    const auto keys = std::max<std::int64_t>(1, std::llround(static_cast<double>(rows) / rows_per_key));
    spec.key = {KeyDist::kUniform, 0, keys - 1, 1.0, 0, ColumnType::kInt64};
    spec.payload = {{"dst", ColumnType::kInt64, 0.0, 0}, {"weight", ColumnType::kFloat64, 0.0, 0}};
    spec.seed = seed;
    return spec;
}

}  // namespace ixframe
