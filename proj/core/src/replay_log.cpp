#include <ixframe/replay_log.hpp>

#include <ixframe/canonical_key.hpp>
#include <ixframe/error.hpp>

#include <zlib.h>

#include <fstream>
#include <iterator>

namespace ixframe {

namespace {

constexpr std::uint8_t kTagCreate = 1;
constexpr std::uint8_t kTagAppend = 2;

class Writer {
public:
    explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

    template <class T>
    void put(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    void schema(const Schema& s) {
        put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
        for (const auto& c : s.columns()) {
            put<std::uint8_t>(static_cast<std::uint8_t>(c.type));
            put<std::uint8_t>(c.nullable ? 1 : 0);
            put<std::uint16_t>(static_cast<std::uint16_t>(c.name.size()));
            bytes({reinterpret_cast<const std::uint8_t*>(c.name.data()), c.name.size()});
        }
    }

    void rows(const PlainTable& t) {
        put<std::uint64_t>(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) {
            const auto r = t.row(i);
            put<std::uint32_t>(static_cast<std::uint32_t>(r.size()));
            bytes(r);
        }
    }

private:
    std::vector<std::uint8_t>& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    template <class T>
    auto get() -> T {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return v;
    }
    auto bytes(std::size_t n) -> std::span<const std::uint8_t> {
        need(n);
        auto out = in_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    auto schema() -> Schema {
        const auto n = get<std::uint16_t>();
        std::vector<Column> cols;
        for (std::size_t i = 0; i < n; ++i) {
            const auto type = get<std::uint8_t>();
            if (type > static_cast<std::uint8_t>(ColumnType::kUtf8)) {
                raise(ErrorCode::kCorruptLog, "unknown column type " + std::to_string(type));
            }
            const auto nullable = get<std::uint8_t>();
            const auto len = get<std::uint16_t>();
            const auto name = bytes(len);
            cols.push_back({std::string(name.begin(), name.end()), static_cast<ColumnType>(type), nullable != 0});
        }
        try {
            return Schema(std::move(cols));
        } catch (const Error& e) {
            raise(ErrorCode::kCorruptLog, std::string("bad schema: ") + e.what());
        }
    }

    auto rows(const Schema& schema) -> PlainTable {
        PlainTable t(schema);
        const auto n = get<std::uint64_t>();
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto len = get<std::uint32_t>();
            try {
                t.add_payload(bytes(len));
            } catch (const Error& e) {
                raise(ErrorCode::kCorruptLog, "row " + std::to_string(i) + ": " + e.what());
            }
        }
        return t;
    }

    [[nodiscard]] auto done() const -> bool { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) raise(ErrorCode::kCorruptLog, "record truncated");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

auto crc32_of(std::span<const std::uint8_t> b) -> std::uint32_t {
    return static_cast<std::uint32_t>(::crc32(0L, b.data(), static_cast<uInt>(b.size())));
}

}  // namespace

auto ReplayLog::for_frame(const IndexedDataFrame& df, const PlainTable& rows) -> ReplayLog {
    if (df.parent_version()) raise(ErrorCode::kCorruptLog, "log must start at a root version");
    ReplayLog log;
    log.record_create({df.version_no(), df.index_col(), df.num_partitions(), df.options().partition,
                       rows.with_schema(df.schema().with_index(std::nullopt))});
    return log;
}

void ReplayLog::add(std::shared_ptr<const LogEntry> entry) {
    const auto version = std::visit([](const auto& e) { return e.version; }, *entry);
    if (by_version_.contains(version)) {
        raise(ErrorCode::kCorruptLog, "version " + std::to_string(version) + " logged twice");
    }
    by_version_.emplace(version, entries_.size());
    entries_.push_back(std::move(entry));
}

void ReplayLog::record_create(CreateIndexEntry entry) {
    if (!entries_.empty()) raise(ErrorCode::kCorruptLog, "CreateIndex must be the first record");
    if (entry.version != 1) raise(ErrorCode::kCorruptLog, "CreateIndex must carry version 1");
    if (entry.rows.schema().empty()) raise(ErrorCode::kCorruptLog, "CreateIndex without columns");
    if (entry.index_col >= entry.rows.schema().size() || entry.partitions == 0) {
        raise(ErrorCode::kCorruptLog, "CreateIndex with bad index column or partition count");
    }
    entry.rows = entry.rows.with_schema(entry.rows.schema().with_index(std::nullopt));
    add(std::make_shared<const LogEntry>(std::move(entry)));
}

void ReplayLog::record_append(AppendEntry entry) {
    if (entries_.empty()) raise(ErrorCode::kCorruptLog, "AppendBatch before CreateIndex");
    if (!by_version_.contains(entry.parent)) {
        raise(ErrorCode::kCorruptLog, "AppendBatch names unknown parent " + std::to_string(entry.parent));
    }
    if (entry.version <= entry.parent) {
        raise(ErrorCode::kCorruptLog, "AppendBatch version " + std::to_string(entry.version) +
                                          " is not newer than its parent");
    }
    if (!entry.rows.schema().same_columns(create_entry().rows.schema())) {
        raise(ErrorCode::kCorruptLog, "AppendBatch schema differs from CreateIndex");
    }
    entry.rows = entry.rows.with_schema(entry.rows.schema().with_index(std::nullopt));
    add(std::make_shared<const LogEntry>(std::move(entry)));
}

void ReplayLog::record_append(const IndexedDataFrame& child, const PlainTable& rows) {
    if (!child.parent_version()) raise(ErrorCode::kCorruptLog, "record_append needs a child version");
    record_append(AppendEntry{child.version_no(), *child.parent_version(),
                              rows.with_schema(child.schema().with_index(std::nullopt))});
}

auto ReplayLog::versions() const -> std::vector<std::uint64_t> {
    std::vector<std::uint64_t> out;
    for (const auto& [v, _] : by_version_) out.push_back(v);
    return out;
}

auto ReplayLog::latest_version() const -> std::uint64_t {
    if (by_version_.empty()) raise(ErrorCode::kCorruptLog, "empty log");
    return by_version_.rbegin()->first;
}

auto ReplayLog::create_entry() const -> const CreateIndexEntry& {
    if (entries_.empty()) raise(ErrorCode::kCorruptLog, "empty log");
    return std::get<CreateIndexEntry>(*entries_.front());
}

auto ReplayLog::lineage(std::uint64_t version) const -> std::vector<std::uint64_t> {
    std::vector<std::uint64_t> chain;
    for (;;) {
        auto it = by_version_.find(version);
        if (it == by_version_.end()) raise(ErrorCode::kCorruptLog, "unknown version " + std::to_string(version));
        chain.push_back(version);
        const auto& e = *entries_[it->second];
        if (std::holds_alternative<CreateIndexEntry>(e)) break;
        version = std::get<AppendEntry>(e).parent;
    }
    return {chain.rbegin(), chain.rend()};
}

auto ReplayLog::replay(std::uint64_t version, std::size_t threads) const -> IndexedDataFrame {
    const auto chain = lineage(version);
    const auto& c = create_entry();
    auto df = IndexedDataFrame::create_index(c.rows, c.index_col, {c.partitions, c.partition, threads});
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const auto& a = std::get<AppendEntry>(*entries_[by_version_.at(chain[i])]);
        df = df.append_rows_as(a.rows, a.version);
    }
    return df;
}

auto ReplayLog::replay_all(std::size_t threads) const -> std::map<std::uint64_t, IndexedDataFrame> {
    std::map<std::uint64_t, IndexedDataFrame> out;
    const auto& c = create_entry();
    out.emplace(c.version,
                IndexedDataFrame::create_index(c.rows, c.index_col, {c.partitions, c.partition, threads}));
    // Parents always precede children in the log.
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        const auto& a = std::get<AppendEntry>(*entries_[i]);
        out.emplace(a.version, out.at(a.parent).append_rows_as(a.rows, a.version));
    }
    return out;
}

auto ReplayLog::rebuild_partition(std::uint64_t version, std::size_t partition) const
    -> std::shared_ptr<const PartitionSnapshot> {
    const auto chain = lineage(version);
    const auto& c = create_entry();
    if (partition >= c.partitions) {
        raise(ErrorCode::kOutOfBounds, "partition " + std::to_string(partition) + " of " +
                                           std::to_string(c.partitions));
    }
    auto codec = std::make_shared<const RowCodec>(c.rows.schema().with_index(c.index_col));
    auto route = [&](const PlainTable& rows) {
        std::vector<KeyedRow> mine;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = rows.row(i);
            const auto key = canonical_key(*codec, r, c.index_col);
            if (partition_of(key, c.partitions) == partition) mine.push_back({key, r});
        }
        return mine;
    };
    const auto pid = static_cast<std::uint32_t>(partition);
    std::shared_ptr<const PartitionSnapshot> snap;
    {
        IndexedPartition part(pid, codec, c.partition);
        part.insert(route(c.rows));
        snap = part.freeze();
    }
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const auto& a = std::get<AppendEntry>(*entries_[by_version_.at(chain[i])]);
        auto mine = route(a.rows);
        if (mine.empty()) continue;
        IndexedPartition next(*snap);
        next.insert(mine);
        snap = next.freeze();
    }
    return snap;
}

auto ReplayLog::encode_record(const LogEntry& entry) -> std::vector<std::uint8_t> {
    std::vector<std::uint8_t> out;
    Writer w(out);
    if (const auto* c = std::get_if<CreateIndexEntry>(&entry)) {
        w.put<std::uint8_t>(kTagCreate);
        w.put<std::uint64_t>(c->version);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(c->index_col));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(c->partitions));
        w.put<std::uint32_t>(c->partition.batch_bytes);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(c->partition.max_row_bytes));
        w.schema(c->rows.schema());
        w.rows(c->rows);
    } else {
        const auto& a = std::get<AppendEntry>(entry);
        w.put<std::uint8_t>(kTagAppend);
        w.put<std::uint64_t>(a.version);
        w.put<std::uint64_t>(a.parent);
        w.schema(a.rows.schema());
        w.rows(a.rows);
    }
    return out;
}

auto ReplayLog::decode_record(std::span<const std::uint8_t> record) -> LogEntry {
    Reader r(record);
    const auto tag = r.get<std::uint8_t>();
    LogEntry out;
    if (tag == kTagCreate) {
        CreateIndexEntry c;
        c.version = r.get<std::uint64_t>();
        c.index_col = r.get<std::uint32_t>();
        c.partitions = r.get<std::uint32_t>();
        c.partition.batch_bytes = r.get<std::uint32_t>();
        c.partition.max_row_bytes = r.get<std::uint32_t>();
        const auto schema = r.schema();
        c.rows = r.rows(schema);
        out = std::move(c);
    } else if (tag == kTagAppend) {
        AppendEntry a;
        a.version = r.get<std::uint64_t>();
        a.parent = r.get<std::uint64_t>();
        const auto schema = r.schema();
        a.rows = r.rows(schema);
        out = std::move(a);
    } else {
        raise(ErrorCode::kCorruptLog, "unknown record tag " + std::to_string(tag));
    }
    if (!r.done()) raise(ErrorCode::kCorruptLog, "trailing bytes in record");
    return out;
}

auto ReplayLog::encode() const -> std::vector<std::uint8_t> {
    std::vector<std::uint8_t> out;
    Writer w(out);
    for (const auto& e : entries_) {
        const auto rec = encode_record(*e);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(rec.size()));
        w.bytes(rec);
        w.put<std::uint32_t>(crc32_of(rec));
    }
    return out;
}

auto ReplayLog::decode(std::span<const std::uint8_t> bytes) -> ReplayLog {
    ReplayLog log;
    Reader r(bytes);
    std::size_t index = 0;
    while (!r.done()) {
        const auto len = r.get<std::uint32_t>();
        const auto rec = r.bytes(len);
        const auto crc = r.get<std::uint32_t>();
        if (crc != crc32_of(rec)) {
            raise(ErrorCode::kCorruptLog, "CRC mismatch in record " + std::to_string(index));
        }
        auto entry = decode_record(rec);
        if (auto* c = std::get_if<CreateIndexEntry>(&entry)) log.record_create(std::move(*c));
        else log.record_append(std::move(std::get<AppendEntry>(entry)));
        ++index;
    }
    return log;
}

void ReplayLog::save(const std::filesystem::path& path) const {
    const auto bytes = encode();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::kIoError, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorCode::kIoError, "write failed for " + path.string());
}

auto ReplayLog::load(const std::filesystem::path& path) -> ReplayLog {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::kIoError, "cannot read " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

}  // namespace ixframe
