#include <ixframe/dataframe.hpp>
#include <ixframe/parallel.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <thread>

namespace ixframe {
namespace {

using testing::filter_rows;
using testing::key_value;
using testing::sorted;

auto sample_table(ColumnType key_type, std::size_t rows, std::int64_t keys, std::uint64_t seed) -> PlainTable {
    Schema schema({{"k", key_type, false}, {"v", ColumnType::kInt64, false}, {"s", ColumnType::kUtf8, true}});
    PlainTable t(schema);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < rows; ++i) {
        const std::int64_t k = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(keys));
        Row row{key_value(key_type, k), static_cast<std::int64_t>(i), Value{}};
        if (i % 3 != 0) row[2] = testing::random_string(rng, 8);
        t.add_row(row);
    }
    return t;
}

auto small_options(std::size_t partitions = 4) -> IndexOptions {
    IndexOptions o;
    o.partitions = partitions;
    o.threads = 2;
    return o;
}

class DataFrameKeyTypes : public ::testing::TestWithParam<ColumnType> {};

TEST_P(DataFrameKeyTypes, GetRowsMatchesFilterOracle) {
    const auto type = GetParam();
    const auto table = sample_table(type, 3000, 150, 5);
    const auto df = IndexedDataFrame::create_index(table, 0, small_options());
    EXPECT_EQ(df.row_count(), 3000u);
    for (std::int64_t k = 0; k < 160; ++k) {
        const auto key = key_value(type, k);
        EXPECT_EQ(sorted(df.get_rows(key)), filter_rows(table, 0, key)) << "key " << k;
    }
}

INSTANTIATE_TEST_SUITE_P(AllTypes, DataFrameKeyTypes,
                         ::testing::Values(ColumnType::kInt32, ColumnType::kInt64, ColumnType::kFloat64,
                                           ColumnType::kUtf8));

TEST(DataFrameTest, GetRowsIsNewestFirst) {
    Schema schema({{"k", ColumnType::kInt64, false}, {"v", ColumnType::kInt64, false}});
    PlainTable t(schema);
    for (std::int64_t i = 0; i < 10; ++i) t.add_row(Row{std::int64_t{1}, i});
    const auto df = IndexedDataFrame::create_index(t, 0, small_options());
    const auto rows = df.get_rows(std::int64_t{1}).rows();
    ASSERT_EQ(rows.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(std::get<std::int64_t>(rows[i][1]), 9 - static_cast<std::int64_t>(i));
}

TEST(DataFrameTest, LookupKeyIsCoercedToColumnType) {
    const auto table = sample_table(ColumnType::kInt32, 500, 20, 3);
    const auto df = IndexedDataFrame::create_index(table, 0, small_options());
    EXPECT_EQ(sorted(df.get_rows(std::int64_t{4})), filter_rows(table, 0, std::int32_t{4}));
    EXPECT_IXFRAME_ERROR(df.get_rows(std::string("4")), ErrorCode::kTypeMismatch);
    EXPECT_IXFRAME_ERROR(df.get_rows(Value{}), ErrorCode::kTypeMismatch);
    EXPECT_IXFRAME_ERROR(df.get_rows(std::int64_t{1} << 40), ErrorCode::kTypeMismatch);
}

TEST(DataFrameTest, CreateIndexValidation) {
    const auto table = sample_table(ColumnType::kInt64, 10, 5, 1);
    EXPECT_IXFRAME_ERROR(IndexedDataFrame::create_index(table, 7, small_options()), ErrorCode::kUnsupportedColumn);
    EXPECT_IXFRAME_ERROR(IndexedDataFrame::create_index(PlainTable(), 0, small_options()), ErrorCode::kEmptySchema);
    // Column 2 holds NULLs.
    EXPECT_IXFRAME_ERROR(IndexedDataFrame::create_index(table, 2, small_options()), ErrorCode::kTypeMismatch);
    auto bad = small_options();
    bad.partition.batch_bytes = 100;
    EXPECT_IXFRAME_ERROR(IndexedDataFrame::create_index(table, 0, bad), ErrorCode::kOutOfBounds);
}

TEST(DataFrameTest, RowsLandInTheirHashPartition) {
    const auto table = sample_table(ColumnType::kInt64, 2000, 300, 8);
    const auto df = IndexedDataFrame::create_index(table, 0, small_options(7));
    std::size_t total = 0;
    for (std::size_t p = 0; p < df.num_partitions(); ++p) {
        df.partition(p).scan([&](RowBytes r) {
            EXPECT_EQ(partition_of(canonical_key(df.codec(), r, 0), 7), p);
            ++total;
        });
    }
    EXPECT_EQ(total, 2000u);
    EXPECT_EQ(sorted(df.scan()), sorted(table));
}

TEST(DataFrameTest, AppendCreatesIndependentVersions) {
    const auto base_rows = sample_table(ColumnType::kInt64, 1000, 50, 11);
    const auto v1 = IndexedDataFrame::create_index(base_rows, 0, small_options());
    const auto extra_a = sample_table(ColumnType::kInt64, 200, 50, 12);
    const auto extra_b = sample_table(ColumnType::kInt64, 300, 50, 13);
    const auto va = v1.append_rows(extra_a);
    const auto vb = v1.append_rows(extra_b);
    const auto vaa = va.append_rows(extra_b);

    EXPECT_EQ(v1.version_no(), 1u);
    EXPECT_FALSE(v1.parent_version().has_value());
    EXPECT_EQ(va.version_no(), 2u);
    EXPECT_EQ(vb.version_no(), 3u);
    EXPECT_EQ(vaa.version_no(), 4u);
    EXPECT_EQ(vaa.parent_version(), 2u);

    PlainTable all_a = base_rows;
    all_a.append_table(extra_a);
    PlainTable all_b = base_rows;
    all_b.append_table(extra_b);
    PlainTable all_aa = all_a;
    all_aa.append_table(extra_b);
    for (std::int64_t k = 0; k < 50; ++k) {
        const Value key = key_value(ColumnType::kInt64, k);
        EXPECT_EQ(sorted(v1.get_rows(key)), filter_rows(base_rows, 0, key));
        EXPECT_EQ(sorted(va.get_rows(key)), filter_rows(all_a, 0, key));
        EXPECT_EQ(sorted(vb.get_rows(key)), filter_rows(all_b, 0, key));
        EXPECT_EQ(sorted(vaa.get_rows(key)), filter_rows(all_aa, 0, key));
    }
    EXPECT_EQ(vaa.row_count(), 1500u);
    EXPECT_EQ(v1.row_count(), 1000u);
}

TEST(DataFrameTest, AppendSharesUntouchedPartitions) {
    const auto table = sample_table(ColumnType::kInt64, 1000, 100, 2);
    const auto v1 = IndexedDataFrame::create_index(table, 0, small_options(8));
    Schema schema = table.schema();
    PlainTable one(schema);
    one.add_row(Row{key_value(ColumnType::kInt64, 3), std::int64_t{-1}, Value{}});
    const auto v2 = v1.append_rows(one);
    const auto touched = v1.partition_for(key_value(ColumnType::kInt64, 3));
    for (std::size_t p = 0; p < 8; ++p) {
        if (p == touched) {
            EXPECT_NE(v1.shared_partition(p), v2.shared_partition(p));
        } else {
            EXPECT_EQ(v1.shared_partition(p), v2.shared_partition(p));
        }
    }
}

TEST(DataFrameTest, AppendRejectsOtherSchemas) {
    const auto table = sample_table(ColumnType::kInt64, 10, 5, 1);
    const auto df = IndexedDataFrame::create_index(table, 0, small_options());
    PlainTable other(Schema({{"k", ColumnType::kInt64, false}}));
    EXPECT_IXFRAME_ERROR((void)df.append_rows(other), ErrorCode::kSchemaMismatch);
}

TEST(DataFrameTest, ExplicitVersionsAreReserved) {
    const auto table = sample_table(ColumnType::kInt64, 10, 5, 1);
    const auto v1 = IndexedDataFrame::create_index(table, 0, small_options());
    const auto v9 = v1.append_rows_as(table, 9);
    EXPECT_EQ(v9.version_no(), 9u);
    EXPECT_EQ(v1.append_rows(table).version_no(), 10u);
    EXPECT_IXFRAME_ERROR((void)v9.append_rows_as(table, 9), ErrorCode::kInvalidPlan);
}

TEST(DataFrameTest, ConcurrentAppendsGetDistinctVersions) {
    const auto table = sample_table(ColumnType::kInt64, 100, 10, 1);
    const auto v1 = IndexedDataFrame::create_index(table, 0, small_options());
    std::vector<std::uint64_t> seen(8);
    {
        std::vector<std::jthread> threads;
        for (std::size_t t = 0; t < 8; ++t) {
            threads.emplace_back([&, t] { seen[t] = v1.append_rows(table).version_no(); });
        }
    }
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::adjacent_find(seen.begin(), seen.end()), seen.end());
    EXPECT_EQ(seen.front(), 2u);
    EXPECT_EQ(seen.back(), 9u);
}

TEST(DataFrameTest, StatsAddUp) {
    const auto table = sample_table(ColumnType::kInt64, 5000, 250, 4);
    const auto df = IndexedDataFrame::create_index(table, 0, small_options());
    const auto s = df.stats();
    EXPECT_EQ(s.row_count, 5000u);
    EXPECT_EQ(s.data_bytes, table.byte_size());
    EXPECT_EQ(s.backptr_bytes, 5000u * 8u);
    EXPECT_EQ(s.partitions.size(), 4u);
    EXPECT_GT(s.index_overhead_ratio, 0.0);
    EXPECT_DOUBLE_EQ(s.index_overhead_ratio, static_cast<double>(s.index_bytes) / static_cast<double>(s.data_bytes));
}

TEST(DataFrameTest, PartitionTouchesCountLookups) {
    const auto table = sample_table(ColumnType::kInt64, 100, 10, 1);
    const auto df = IndexedDataFrame::create_index(table, 0, small_options(4));
    const Value key = key_value(ColumnType::kInt64, 2);
    for (int i = 0; i < 5; ++i) (void)df.get_rows(key);
    const auto touches = df.partition_touches();
    ASSERT_EQ(touches.size(), 4u);
    EXPECT_EQ(touches[df.partition_for(key)], 5u);
    EXPECT_EQ(std::accumulate(touches.begin(), touches.end(), std::uint64_t{0}), 5u);
}

TEST(ParallelTest, RunsEveryIndexOnceAndRethrows) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(1000, 4, [&](std::size_t i) { hits[i].fetch_add(1); });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    EXPECT_THROW(parallel_for(100, 4,
                              [](std::size_t i) {
                                  if (i == 57) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

}  // namespace
}  // namespace ixframe
