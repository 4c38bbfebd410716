#include <ixframe/error.hpp>
#include <ixframe/packed_ptr.hpp>
#include <ixframe/plain_table.hpp>
#include <ixframe/row_batch.hpp>
#include <ixframe/row_codec.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"

namespace ixframe {
namespace {

auto mixed_schema() -> Schema {
    return Schema({{"id", ColumnType::kInt64},
                   {"small", ColumnType::kInt32, true},
                   {"score", ColumnType::kFloat64, true},
                   {"name", ColumnType::kUtf8},
                   {"note", ColumnType::kUtf8, true}});
}

TEST(RowCodecTest, RoundTripsEveryType) {
    const RowCodec codec(mixed_schema());
    const Row row{std::int64_t{-42}, std::int32_t{7}, 3.5, std::string("héllo"), std::string("")};
    const auto bytes = codec.encode(row);
    const auto back = codec.decode(bytes);
    ASSERT_EQ(back.size(), row.size());
    for (std::size_t i = 0; i < row.size(); ++i) EXPECT_TRUE(same_value(row[i], back[i])) << i;
}

TEST(RowCodecTest, NullsRoundTrip) {
    const RowCodec codec(mixed_schema());
    const Row row{std::int64_t{1}, std::monostate{}, std::monostate{}, std::string("x"), std::monostate{}};
    const auto bytes = codec.encode(row);
    EXPECT_TRUE(codec.is_null(bytes, 1));
    EXPECT_TRUE(codec.is_null(bytes, 2));
    EXPECT_FALSE(codec.is_null(bytes, 3));
    EXPECT_TRUE(codec.is_null(bytes, 4));
    const auto back = codec.decode(bytes);
    EXPECT_TRUE(is_null(back[1]));
    EXPECT_TRUE(is_null(back[4]));
}

TEST(RowCodecTest, FixedWidthRowsHaveExactSize) {
    const RowCodec codec(Schema({{"a", ColumnType::kInt64}}));
    EXPECT_EQ(codec.encode(Row{std::int64_t{5}}).size(), 8u);
    const RowCodec three(Schema({{"a", ColumnType::kInt32}, {"b", ColumnType::kInt64}, {"c", ColumnType::kFloat64}}));
    EXPECT_EQ(three.encode(Row{std::int32_t{1}, std::int64_t{2}, 3.0}).size(), 20u);
}

TEST(RowCodecTest, FloatsKeepTheirBits) {
    const RowCodec codec(Schema({{"f", ColumnType::kFloat64}}));
    for (double d : {0.0, -0.0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::denorm_min(), -1e308}) {
        const auto back = codec.decode(codec.encode(Row{d}));
        EXPECT_TRUE(same_value(back[0], Value{d}));
    }
}

TEST(RowCodecTest, RejectsWrongTypes) {
    const RowCodec codec(Schema({{"a", ColumnType::kInt32}}));
    EXPECT_IXFRAME_ERROR((void)codec.encode(Row{std::string("x")}), ErrorCode::kTypeMismatch);
    EXPECT_IXFRAME_ERROR((void)codec.encode(Row{std::monostate{}}), ErrorCode::kTypeMismatch);
    EXPECT_IXFRAME_ERROR((void)codec.encode(Row{}), ErrorCode::kTypeMismatch);
}

TEST(RowCodecTest, RejectsInvalidUtf8) {
    const RowCodec codec(Schema({{"s", ColumnType::kUtf8}}));
    EXPECT_IXFRAME_ERROR((void)codec.encode(Row{std::string("\xff\xfe")}), ErrorCode::kTypeMismatch);
}

TEST(RowCodecTest, EnforcesMaxRowBytes) {
    const RowCodec codec(Schema({{"s", ColumnType::kUtf8}}));
    EXPECT_NO_THROW((void)codec.encode(Row{std::string(1022, 'a')}));
    EXPECT_IXFRAME_ERROR((void)codec.encode(Row{std::string(1023, 'a')}), ErrorCode::kRowTooLarge);
}

TEST(RowCodecTest, EncodeIntoRestoresBufferOnFailure) {
    const RowCodec codec(Schema({{"s", ColumnType::kUtf8}}));
    std::vector<std::uint8_t> buf{1, 2, 3};
    EXPECT_THROW(codec.encode_into(Row{std::string(2000, 'a')}, buf), Error);
    EXPECT_EQ(buf, (std::vector<std::uint8_t>{1, 2, 3}));
}

TEST(RowCodecTest, DecodeRejectsCorruptPayloads) {
    const RowCodec codec(mixed_schema());
    auto bytes = codec.encode(Row{std::int64_t{1}, std::int32_t{2}, 1.0, std::string("abc"), std::string("de")});
    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_IXFRAME_ERROR((void)codec.decode(truncated), ErrorCode::kCorruptPayload);
    auto extended = bytes;
    extended.push_back(0);
    EXPECT_IXFRAME_ERROR((void)codec.decode(extended), ErrorCode::kCorruptPayload);
}

TEST(RowCodecTest, MeasureFindsRowLengthInsideLargerBuffer) {
    const RowCodec codec(mixed_schema());
    std::mt19937_64 rng(3);
    std::vector<std::uint8_t> buf;
    std::vector<std::size_t> sizes;
    for (int i = 0; i < 100; ++i) {
        const auto before = buf.size();
        codec.encode_into(Row{std::int64_t{i}, std::monostate{}, 1.5, testing::random_string(rng, 30),
                              i % 2 ? Value{} : Value{testing::random_string(rng, 5)}},
                          buf);
        sizes.push_back(buf.size() - before);
    }
    std::size_t pos = 0;
    for (auto s : sizes) {
        EXPECT_EQ(codec.measure(RowBytes(buf).subspan(pos)), s);
        pos += s;
    }
}

TEST(RowCodecTest, ConcatMatchesEncodingOfConcatenatedValues) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto make = [&](const char* prefix) {
            std::vector<Column> cols;
            const int n = 1 + static_cast<int>(rng() % 5);
            for (int c = 0; c < n; ++c) {
                cols.push_back({prefix + std::to_string(c), testing::random_type(rng), rng() % 2 == 0});
            }
            return Schema(cols);
        };
        const auto ls = make("l");
        const auto rs = make("r");
        auto values = [&](const Schema& s) {
            Row row;
            for (const auto& c : s.columns()) {
                row.push_back(c.nullable && rng() % 3 == 0 ? Value{} : testing::random_value(rng, c.type));
            }
            return row;
        };
        const RowCodec lc(ls);
        const RowCodec rc(rs);
        const RowCodec joined(Schema::concat(ls, rs));
        auto l = values(ls);
        auto r = values(rs);
        std::vector<std::uint8_t> spliced;
        RowCodec::concat_into(lc, lc.encode(l), rc, rc.encode(r), spliced);
        Row all = l;
        all.insert(all.end(), r.begin(), r.end());
        EXPECT_EQ(spliced, joined.encode(all, SIZE_MAX));
    }
}

TEST(SchemaTest, ValidatesNamesAndIndex) {
    EXPECT_IXFRAME_ERROR(Schema({{"a", ColumnType::kInt64}, {"a", ColumnType::kInt32}}), ErrorCode::kInvalidSchema);
    EXPECT_IXFRAME_ERROR(Schema({{"a", ColumnType::kInt64}}, 1), ErrorCode::kInvalidSchema);
    const Schema s({{"a", ColumnType::kInt64}, {"b", ColumnType::kUtf8}}, 1);
    EXPECT_EQ(s.index_col(), 1u);
    EXPECT_EQ(s.find("b"), 1u);
    EXPECT_FALSE(s.find("zz").has_value());
}

TEST(SchemaTest, ConcatRenamesCollisions) {
    const Schema a({{"k", ColumnType::kInt64}, {"v", ColumnType::kInt64}});
    const Schema b({{"k", ColumnType::kInt64}, {"k_r", ColumnType::kInt64}});
    const auto c = Schema::concat(a, b);
    ASSERT_EQ(c.size(), 4u);
    // Renaming goes left to right, so the right side's own "k_r" moves on.
    EXPECT_EQ(c.column(2).name, "k_r");
    EXPECT_EQ(c.column(3).name, "k_r_r");
}

TEST(PackedRowPtrTest, FieldBoundaries) {
    using P = PackedRowPtr;
    for (std::uint64_t b : {std::uint64_t{0}, std::uint64_t{1}, P::kMaxBatchId}) {
        for (std::uint64_t o : {std::uint64_t{0}, std::uint64_t{1}, P::kMaxOffset}) {
            for (std::uint64_t s : {std::uint64_t{0}, std::uint64_t{1}, P::kMaxSize}) {
                const auto p = P::pack(b, o, s);
                EXPECT_EQ(p.batch_id(), b);
                EXPECT_EQ(p.offset(), o);
                EXPECT_EQ(p.row_size(), s);
            }
        }
    }
    EXPECT_IXFRAME_ERROR((void)P::pack(P::kMaxBatchId + 1, 0, 0), ErrorCode::kFieldOverflow);
    EXPECT_IXFRAME_ERROR((void)P::pack(0, P::kMaxOffset + 1, 0), ErrorCode::kFieldOverflow);
    EXPECT_IXFRAME_ERROR((void)P::pack(0, 0, P::kMaxSize + 1), ErrorCode::kFieldOverflow);
}

TEST(PackedRowPtrTest, SentinelIsAllOnes) {
    EXPECT_EQ(PackedRowPtr::none().raw(), ~std::uint64_t{0});
    EXPECT_TRUE(PackedRowPtr::none().is_none());
    EXPECT_FALSE(PackedRowPtr::pack(0, 0, 0).is_none());
}

TEST(RowBatchTest, AppendsAndReadsRecords) {
    RowBatch batch(3, 64);
    const std::vector<std::uint8_t> a{1, 2, 3};
    const std::vector<std::uint8_t> b{9, 9};
    const auto oa = batch.append(PackedRowPtr::none(), a);
    const auto pa = PackedRowPtr::pack(3, oa, a.size());
    const auto ob = batch.append(pa, b);
    EXPECT_EQ(oa, 0u);
    EXPECT_EQ(ob, 8u + 3u);
    const auto rb = batch.read(PackedRowPtr::pack(3, ob, b.size()));
    EXPECT_EQ(rb.backward, pa);
    EXPECT_EQ(std::vector<std::uint8_t>(rb.payload.begin(), rb.payload.end()), b);
    EXPECT_TRUE(batch.read(pa).backward.is_none());
    EXPECT_EQ(batch.size(), 8u + 3u + 8u + 2u);
}

TEST(RowBatchTest, FullAndSealed) {
    RowBatch batch(0, 20);
    const std::vector<std::uint8_t> row(12, 1);
    EXPECT_TRUE(batch.fits(12));
    batch.append(PackedRowPtr::none(), row);
    EXPECT_FALSE(batch.fits(1));
    EXPECT_FALSE(batch.try_append(PackedRowPtr::none(), std::vector<std::uint8_t>{1}).has_value());
    EXPECT_IXFRAME_ERROR(batch.append(PackedRowPtr::none(), std::vector<std::uint8_t>{1}), ErrorCode::kBatchFull);
    RowBatch other(1, 64);
    other.seal();
    EXPECT_IXFRAME_ERROR(other.append(PackedRowPtr::none(), row), ErrorCode::kBatchSealed);
}

TEST(RowBatchTest, ReadValidatesPointer) {
    RowBatch batch(5, 64);
    batch.append(PackedRowPtr::none(), std::vector<std::uint8_t>{1, 2});
    EXPECT_IXFRAME_ERROR((void)batch.read(PackedRowPtr::pack(4, 0, 2)), ErrorCode::kOutOfBounds);
    EXPECT_IXFRAME_ERROR((void)batch.read(PackedRowPtr::pack(5, 0, 40)), ErrorCode::kOutOfBounds);
}

TEST(RowBatchTest, CapacityLimits) {
    EXPECT_IXFRAME_ERROR(RowBatch(0, kMaxBatchBytes + 1), ErrorCode::kOutOfBounds);
    EXPECT_NO_THROW(RowBatch(0, kMaxBatchBytes));
}

TEST(RowBatchTest, CloneIsIndependent) {
    RowBatch batch(2, 64);
    batch.append(PackedRowPtr::none(), std::vector<std::uint8_t>{1});
    batch.seal();
    auto copy = batch.clone_unsealed();
    copy->append(PackedRowPtr::none(), std::vector<std::uint8_t>{2});
    EXPECT_EQ(batch.size(), 9u);
    EXPECT_EQ(copy->size(), 18u);
    EXPECT_FALSE(copy->sealed());
    EXPECT_EQ(copy->id(), 2u);
}

TEST(PlainTableTest, AddsAndSorts) {
    auto t = PlainTable::from_rows(Schema({{"a", ColumnType::kInt64}}),
                                   {Row{std::int64_t{3}}, Row{std::int64_t{1}}, Row{std::int64_t{2}}});
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.byte_size(), 24u);
    EXPECT_EQ(t.sorted_payloads().size(), 3u);
    EXPECT_IXFRAME_ERROR(t.add_payload(std::vector<std::uint8_t>{1, 2}), ErrorCode::kCorruptPayload);
}

}  // namespace
}  // namespace ixframe
