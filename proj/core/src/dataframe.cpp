#include <ixframe/dataframe.hpp>

#include <ixframe/error.hpp>
#include <ixframe/parallel.hpp>

#include <algorithm>
#include <thread>

namespace ixframe {

auto default_partition_count() -> std::size_t {
    return std::max<std::size_t>(1, 2 * std::size_t{std::thread::hardware_concurrency()});
}

struct IndexedDataFrame::State {
    std::shared_ptr<const RowCodec> codec;
    std::size_t index_col = 0;
    IndexOptions options;
    std::uint64_t version_no = 1;
    std::optional<std::uint64_t> parent_version;
    std::shared_ptr<VersionAllocator> allocator;
    std::vector<std::shared_ptr<const PartitionSnapshot>> partitions;
    std::size_t row_count = 0;
    std::size_t byte_size = 0;
    std::unique_ptr<std::atomic<std::uint64_t>[]> touches;
};

namespace {

/// Buckets rows by owning partition, keeping input order within a bucket.
auto route(const PlainTable& table, const RowCodec& codec, std::size_t col, std::size_t partitions)
    -> std::vector<std::vector<KeyedRow>> {
    std::vector<std::vector<KeyedRow>> buckets(partitions);
    const std::size_t hint = table.size() / partitions + 1;
    for (auto& b : buckets) b.reserve(hint + hint / 8);
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto row = table.row(i);
        if (codec.is_null(row, col)) {
            raise(ErrorCode::kTypeMismatch, "row " + std::to_string(i) + " has NULL in the index column");
        }
        const auto key = canonical_key(codec, row, col);
        buckets[partition_of(key, partitions)].push_back({key, row});
    }
    return buckets;
}

auto resolve_options(IndexOptions options) -> IndexOptions {
    if (options.partitions == 0) options.partitions = default_partition_count();
    if (options.threads == 0) options.threads = default_thread_count();
    options.partition.validate();
    return options;
}

}  // namespace

auto IndexedDataFrame::create_index(const PlainTable& table, std::size_t col, IndexOptions options)
    -> IndexedDataFrame {
    const auto& schema = table.schema();
    if (schema.empty()) {
        raise(ErrorCode::kEmptySchema, "cannot index a table without columns");
    }
    if (col >= schema.size()) {
        raise(ErrorCode::kUnsupportedColumn, "index column " + std::to_string(col) + " out of range for " +
                                                 format_schema(schema));
    }
    options = resolve_options(options);

    auto state = std::make_shared<State>();
    state->codec = std::make_shared<const RowCodec>(schema.with_index(col));
    state->index_col = col;
    state->options = options;
    state->version_no = 1;
    state->allocator = std::make_shared<VersionAllocator>(2);
    state->partitions.resize(options.partitions);
    state->touches = std::make_unique<std::atomic<std::uint64_t>[]>(options.partitions);

    auto buckets = route(table, *state->codec, col, options.partitions);
    parallel_for(options.partitions, options.threads, [&](std::size_t p) {
        IndexedPartition part(static_cast<std::uint32_t>(p), state->codec, options.partition);
        part.insert(buckets[p]);
        state->partitions[p] = part.freeze();
    });
    state->row_count = table.size();
    state->byte_size = table.byte_size();
    return IndexedDataFrame(std::move(state));
}

auto IndexedDataFrame::append_rows(const PlainTable& rows) const -> IndexedDataFrame {
    return derive(rows, state_->allocator->next());
}

auto IndexedDataFrame::append_rows_as(const PlainTable& rows, std::uint64_t version) const -> IndexedDataFrame {
    if (version <= state_->version_no) {
        raise(ErrorCode::kInvalidPlan, "version " + std::to_string(version) + " is not newer than parent " +
                                           std::to_string(state_->version_no));
    }
    state_->allocator->observe(version);
    return derive(rows, version);
}

auto IndexedDataFrame::derive(const PlainTable& rows, std::uint64_t version) const -> IndexedDataFrame {
    const auto& parent = *state_;
    if (!rows.schema().same_columns(parent.codec->schema())) {
        raise(ErrorCode::kSchemaMismatch, "append of " + format_schema(rows.schema()) + " to " +
                                              format_schema(parent.codec->schema()));
    }
    auto state = std::make_shared<State>();
    state->codec = parent.codec;
    state->index_col = parent.index_col;
    state->options = parent.options;
    state->allocator = parent.allocator;
    state->version_no = version;
    state->parent_version = parent.version_no;
    state->partitions = parent.partitions;
    state->touches = std::make_unique<std::atomic<std::uint64_t>[]>(parent.partitions.size());

    auto buckets = route(rows, *parent.codec, parent.index_col, parent.partitions.size());
    parallel_for(buckets.size(), parent.options.threads, [&](std::size_t p) {
        if (buckets[p].empty()) return;
        IndexedPartition successor(*parent.partitions[p]);
        successor.insert(buckets[p]);
        state->partitions[p] = successor.freeze();
    });
    state->row_count = parent.row_count + rows.size();
    state->byte_size = parent.byte_size + rows.byte_size();
    return IndexedDataFrame(std::move(state));
}

auto IndexedDataFrame::key_of(const Value& key) const -> CanonicalKey {
    const auto& column = state_->codec->schema().column(state_->index_col);
    if (is_null(key)) {
        raise(ErrorCode::kTypeMismatch, "lookup key is NULL");
    }
    return canonical_key(coerce_value(key, column.type));
}

auto IndexedDataFrame::partition_for(const Value& key) const -> std::size_t {
    return partition_of(key_of(key), state_->partitions.size());
}

auto IndexedDataFrame::get_rows(const Value& key) const -> PlainTable {
    const auto& column = state_->codec->schema().column(state_->index_col);
    if (is_null(key)) {
        raise(ErrorCode::kTypeMismatch, "lookup key is NULL");
    }
    const Value typed = coerce_value(key, column.type);
    const auto ck = canonical_key(typed);
    const auto p = partition_of(ck, state_->partitions.size());
    state_->touches[p].fetch_add(1, std::memory_order_relaxed);

    std::optional<std::string_view> verify;
    if (const auto* s = std::get_if<std::string>(&typed)) verify = *s;

    PlainTable out(state_->codec->schema().with_index(std::nullopt));
    state_->partitions[p]->for_each_match(ck, verify, [&](RowBytes r) { out.add_payload_unchecked(r); });
    return out;
}

auto IndexedDataFrame::stats() const -> DataFrameStats {
    DataFrameStats s;
    for (const auto& p : state_->partitions) {
        auto m = p->memory_stats();
        s.row_count += p->row_count();
        s.data_bytes += m.data_bytes;
        s.index_bytes += m.index_bytes;
        s.backptr_bytes += m.backptr_bytes;
        s.partitions.push_back(m);
    }
    s.index_overhead_ratio =
        s.data_bytes == 0 ? 0.0 : static_cast<double>(s.index_bytes) / static_cast<double>(s.data_bytes);
    return s;
}

auto IndexedDataFrame::scan() const -> PlainTable {
    PlainTable out(state_->codec->schema().with_index(std::nullopt));
    out.reserve(state_->row_count, state_->byte_size);
    for (const auto& p : state_->partitions) {
        p->scan([&](RowBytes r) { out.add_payload_unchecked(r); });
    }
    return out;
}

auto IndexedDataFrame::version_no() const -> std::uint64_t { return state_->version_no; }
auto IndexedDataFrame::parent_version() const -> std::optional<std::uint64_t> { return state_->parent_version; }
auto IndexedDataFrame::schema() const -> const Schema& { return state_->codec->schema(); }
auto IndexedDataFrame::codec() const -> const RowCodec& { return *state_->codec; }
auto IndexedDataFrame::shared_codec() const -> const std::shared_ptr<const RowCodec>& { return state_->codec; }
auto IndexedDataFrame::index_col() const -> std::size_t { return state_->index_col; }
auto IndexedDataFrame::num_partitions() const -> std::size_t { return state_->partitions.size(); }
auto IndexedDataFrame::row_count() const -> std::size_t { return state_->row_count; }
auto IndexedDataFrame::byte_size() const -> std::size_t { return state_->byte_size; }
auto IndexedDataFrame::options() const -> const IndexOptions& { return state_->options; }

auto IndexedDataFrame::partition(std::size_t i) const -> const PartitionSnapshot& {
    return *state_->partitions.at(i);
}

auto IndexedDataFrame::shared_partition(std::size_t i) const -> std::shared_ptr<const PartitionSnapshot> {
    return state_->partitions.at(i);
}

auto IndexedDataFrame::partition_touches() const -> std::vector<std::uint64_t> {
    std::vector<std::uint64_t> out(state_->partitions.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = state_->touches[i].load(std::memory_order_relaxed);
    return out;
}

}  // namespace ixframe
