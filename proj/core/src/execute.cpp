#include <ixframe/engine.hpp>

#include <ixframe/canonical_key.hpp>
#include <ixframe/error.hpp>
#include <ixframe/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <cstring>
#include <mutex>
#include <string>
#include <unordered_map>

namespace ixframe {

namespace {

constexpr std::size_t kChunkRows = 1 << 16;

/// A contiguous row range of a table.
struct Chunk {
    std::shared_ptr<const PlainTable> table;
    std::size_t begin = 0;
    std::size_t end = 0;

    [[nodiscard]] auto size() const -> std::size_t { return end - begin; }
};

/// Intermediate result: chunks in output order, all encoded under one layout.
struct Relation {
    std::shared_ptr<const RowCodec> codec;
    std::vector<Chunk> chunks;

    [[nodiscard]] auto rows() const -> std::size_t {
        std::size_t n = 0;
        for (const auto& c : chunks) n += c.size();
        return n;
    }
};

auto whole(std::shared_ptr<const PlainTable> t) -> Chunk {
    const auto n = t->size();
    return {std::move(t), 0, n};
}

template <class F>
void for_rows(const Chunk& c, F&& fn) {
    for (std::size_t i = c.begin; i < c.end; ++i) fn(c.table->row(i));
}

/// -1, 0, 1. Floats in total order, strings bytewise.
auto compare_cell(const RowCodec& codec, RowBytes row, std::size_t col, const Value& lit) -> int {
    switch (codec.schema().column(col).type) {
        case ColumnType::kInt32:
        case ColumnType::kInt64: {
            const auto a = codec.int_cell(row, col);
            const auto b = std::holds_alternative<std::int32_t>(lit) ? std::get<std::int32_t>(lit)
                                                                     : std::get<std::int64_t>(lit);
            return a < b ? -1 : (a > b ? 1 : 0);
        }
        case ColumnType::kFloat64: {
            const auto a = float_key_bits(codec.float_cell(row, col));
            const auto b = float_key_bits(std::get<double>(lit));
            return a < b ? -1 : (a > b ? 1 : 0);
        }
        case ColumnType::kUtf8: {
            const auto c = codec.string_cell(row, col).compare(std::get<std::string>(lit));
            return c < 0 ? -1 : (c > 0 ? 1 : 0);
        }
    }
    return 0;
}

auto matches(const RowCodec& codec, RowBytes row, std::size_t col, const Predicate& p) -> bool {
    if (codec.is_null(row, col)) return false;
    const int c = compare_cell(codec, row, col, p.value);
    switch (p.kind) {
        case PredicateKind::kEq: return c == 0;
        case PredicateKind::kLt: return c < 0;
        case PredicateKind::kGt: return c > 0;
        case PredicateKind::kRange: return c >= 0 && compare_cell(codec, row, col, p.upper) <= 0;
    }
    return false;
}

/// Same-typed, non-null values; floats in total order.
auto compare_values(const Value& a, const Value& b) -> int {
    if (const auto* x = std::get_if<std::int32_t>(&a)) {
        const auto y = std::get<std::int32_t>(b);
        return *x < y ? -1 : (*x > y ? 1 : 0);
    }
    if (const auto* x = std::get_if<std::int64_t>(&a)) {
        const auto y = std::get<std::int64_t>(b);
        return *x < y ? -1 : (*x > y ? 1 : 0);
    }
    if (const auto* x = std::get_if<double>(&a)) {
        const auto p = float_key_bits(*x);
        const auto q = float_key_bits(std::get<double>(b));
        return p < q ? -1 : (p > q ? 1 : 0);
    }
    const auto c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

struct Routed {
    CanonicalKey key;
    RowBytes row;
};

/// Join key of a row, or nullopt for NULL.
auto join_key(const RowCodec& codec, RowBytes row, std::size_t col) -> std::optional<CanonicalKey> {
    if (codec.is_null(row, col)) return std::nullopt;
    return canonical_key(codec, row, col);
}

auto same_key(const RowCodec& a, RowBytes ra, std::size_t ca, const RowCodec& b, RowBytes rb, std::size_t cb)
    -> bool {
    if (a.schema().column(ca).type != ColumnType::kUtf8) return true;
    return a.string_cell(ra, ca) == b.string_cell(rb, cb);
}

class Executor {
public:
    Executor(const ExecOptions& options, ExecStats* stats)
        : threads_(options.threads == 0 ? default_thread_count() : options.threads), stats_(stats) {}

    auto run(const PhysicalPlan& pp) -> Relation {
        return std::visit([&](const auto& n) { return visit(n, pp); }, pp.node);
    }

private:
    /// Runs fn(i) for i < n in parallel; errors come back as ExecFailure.
    void parallel(std::size_t n, const std::function<void(std::size_t)>& fn) {
        parallel_for(n, threads_, [&](std::size_t i) {
            try {
                fn(i);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::kExecFailure) throw;
                raise(ErrorCode::kExecFailure, "task " + std::to_string(i) + ": " + e.what());
            } catch (const std::exception& e) {
                raise(ErrorCode::kExecFailure, "task " + std::to_string(i) + ": " + e.what());
            }
        });
    }

    void touched(std::size_t n) {
        if (stats_ != nullptr) stats_->partitions_touched += n;
    }

    auto visit(const physical::FullScan& s, const PhysicalPlan& pp) -> Relation {
        Relation rel;
        if (const auto* t = std::get_if<std::shared_ptr<const PlainTable>>(&s.source)) {
            rel.codec = (*t)->shared_codec();
            for (std::size_t b = 0; b < (*t)->size(); b += kChunkRows) {
                rel.chunks.push_back({*t, b, std::min((*t)->size(), b + kChunkRows)});
            }
            touched(1);
            return rel;
        }
        const auto& df = std::get<IndexedDataFrame>(s.source);
        std::vector<std::shared_ptr<const PlainTable>> parts(df.num_partitions());
        parallel(parts.size(), [&](std::size_t p) {
            const auto& part = df.partition(p);
            auto t = std::make_shared<PlainTable>(pp.schema);
            t->reserve(part.row_count(), part.data_bytes());
            part.scan([&](RowBytes r) { t->add_payload_unchecked(r); });
            parts[p] = std::move(t);
        });
        rel.codec = parts.empty() ? std::make_shared<const RowCodec>(pp.schema) : parts.front()->shared_codec();
        for (auto& t : parts) rel.chunks.push_back(whole(std::move(t)));
        touched(parts.size());
        return rel;
    }

    auto visit(const physical::IndexLookup& l, const PhysicalPlan&) -> Relation {
        auto t = std::make_shared<const PlainTable>(l.df.get_rows(l.key));
        touched(1);
        Relation rel{t->shared_codec(), {}};
        rel.chunks.push_back(whole(std::move(t)));
        return rel;
    }

    /// Applies `fn(codec, chunk, out)` to every chunk in parallel.
    template <class F>
    auto map_chunks(const Relation& in, const Schema& schema, F&& fn) -> Relation {
        std::vector<std::shared_ptr<const PlainTable>> outs(in.chunks.size());
        parallel(in.chunks.size(), [&](std::size_t i) {
            auto t = std::make_shared<PlainTable>(schema);
            fn(*in.codec, in.chunks[i], *t);
            outs[i] = std::move(t);
        });
        Relation rel{std::make_shared<const RowCodec>(schema), {}};
        for (auto& t : outs) {
            if (!t->empty()) rel.chunks.push_back(whole(std::move(t)));
        }
        return rel;
    }

    auto visit(const physical::FilterExec& f, const PhysicalPlan& pp) -> Relation {
        auto in = run(*f.input);
        return map_chunks(in, pp.schema, [&](const RowCodec& codec, const Chunk& c, PlainTable& out) {
            for_rows(c, [&](RowBytes r) {
                if (matches(codec, r, f.column, f.predicate)) out.add_payload_unchecked(r);
            });
        });
    }

    auto visit(const physical::ProjectExec& p, const PhysicalPlan& pp) -> Relation {
        auto in = run(*p.input);
        return map_chunks(in, pp.schema, [&](const RowCodec& codec, const Chunk& c, PlainTable& out) {
            Row values(p.columns.size());
            for_rows(c, [&](RowBytes r) {
                for (std::size_t i = 0; i < p.columns.size(); ++i) values[i] = codec.cell(r, p.columns[i]);
                out.add_row(values);
            });
        });
    }

    struct Acc {
        std::int64_t count = 0;
        bool has = false;
        std::uint64_t isum = 0;  // wraps like two's complement
        double fsum = 0.0;
        Value best;
    };

    auto visit(const physical::AggregateExec& a, const PhysicalPlan& pp) -> Relation {
        auto in = run(*a.input);
        std::vector<Column> group_columns;
        for (auto g : a.group_cols) group_columns.push_back(in.codec->schema().column(g));
        const RowCodec group_codec{Schema(group_columns)};
        const auto agg_type = a.column ? in.codec->schema().column(*a.column).type : ColumnType::kInt64;

        using Groups = std::unordered_map<std::string, Acc>;
        auto fold = [&](Acc& acc, const RowCodec& codec, RowBytes r) {
            ++acc.count;
            if (!a.column || codec.is_null(r, *a.column)) return;
            const auto col = *a.column;
            switch (a.agg) {
                case AggKind::kCount: break;
                case AggKind::kSum:
                    if (agg_type == ColumnType::kFloat64) acc.fsum += codec.float_cell(r, col);
                    else acc.isum += static_cast<std::uint64_t>(codec.int_cell(r, col));
                    break;
                case AggKind::kMin:
                case AggKind::kMax: {
                    Value v = codec.cell(r, col);
                    const int c = acc.has ? compare_values(v, acc.best) : 0;
                    if (!acc.has || (a.agg == AggKind::kMin ? c < 0 : c > 0)) acc.best = std::move(v);
                    break;
                }
            }
            acc.has = true;
        };
        auto merge = [&](Acc& into, const Acc& from) {
            into.count += from.count;
            if (!from.has) return;
            into.isum += from.isum;
            into.fsum += from.fsum;
            if (a.agg == AggKind::kMin || a.agg == AggKind::kMax) {
                const int c = into.has ? compare_values(from.best, into.best) : 0;
                if (!into.has || (a.agg == AggKind::kMin ? c < 0 : c > 0)) into.best = from.best;
            }
            into.has = true;
        };

        std::vector<Groups> partials(in.chunks.size());
        parallel(in.chunks.size(), [&](std::size_t i) {
            Row key(a.group_cols.size());
            std::vector<std::uint8_t> buf;
            for_rows(in.chunks[i], [&](RowBytes r) {
                for (std::size_t g = 0; g < a.group_cols.size(); ++g) key[g] = in.codec->cell(r, a.group_cols[g]);
                buf.clear();
                group_codec.encode_into(key, buf, std::numeric_limits<std::size_t>::max());
                fold(partials[i][std::string(buf.begin(), buf.end())], *in.codec, r);
            });
        });
        Groups total;
        for (const auto& part : partials) {
            for (const auto& [k, acc] : part) merge(total[k], acc);
        }
        if (a.group_cols.empty() && total.empty()) total.emplace(std::string(), Acc{});

        std::vector<const std::pair<const std::string, Acc>*> ordered;
        for (const auto& e : total) ordered.push_back(&e);
        std::sort(ordered.begin(), ordered.end(), [](auto* x, auto* y) { return x->first < y->first; });

        auto out = std::make_shared<PlainTable>(pp.schema);
        for (const auto* e : ordered) {
            const auto& k = e->first;
            Row row = a.group_cols.empty()
                          ? Row{}
                          : group_codec.decode({reinterpret_cast<const std::uint8_t*>(k.data()), k.size()});
            const auto& acc = e->second;
            switch (a.agg) {
                case AggKind::kCount: row.emplace_back(acc.count); break;
                case AggKind::kSum:
                    if (!acc.has) row.emplace_back(std::monostate{});
                    else if (agg_type == ColumnType::kFloat64) row.emplace_back(acc.fsum);
                    else row.emplace_back(static_cast<std::int64_t>(acc.isum));
                    break;
                case AggKind::kMin:
                case AggKind::kMax: row.push_back(acc.has ? acc.best : Value{}); break;
            }
            out->add_row(row, std::numeric_limits<std::size_t>::max());
        }
        Relation rel{out->shared_codec(), {}};
        if (!out->empty()) rel.chunks.push_back(whole(std::move(out)));
        return rel;
    }

    /// Routes every non-NULL-keyed row to its partition; per partition the
    /// rows keep relation order.
    auto shuffle(const Relation& rel, std::size_t col, std::size_t partitions) -> std::vector<std::vector<Routed>> {
        std::vector<std::vector<std::vector<Routed>>> local(rel.chunks.size());
        parallel(rel.chunks.size(), [&](std::size_t i) {
            auto& mine = local[i];
            mine.resize(partitions);
            for_rows(rel.chunks[i], [&](RowBytes r) {
                if (auto k = join_key(*rel.codec, r, col)) mine[partition_of(*k, partitions)].push_back({*k, r});
            });
        });
        std::vector<std::vector<Routed>> out(partitions);
        std::vector<std::size_t> bytes(partitions, 0);
        parallel(partitions, [&](std::size_t p) {
            std::size_t n = 0;
            for (const auto& l : local) n += l[p].size();
            out[p].reserve(n);
            for (auto& l : local) {
                for (const auto& r : l[p]) bytes[p] += r.row.size();
                out[p].insert(out[p].end(), l[p].begin(), l[p].end());
                std::vector<Routed>().swap(l[p]);
            }
        });
        if (stats_ != nullptr) {
            for (std::size_t p = 0; p < partitions; ++p) {
                stats_->shuffle_bytes += bytes[p];
                stats_->shuffle_messages += out[p].size();
            }
        }
        return out;
    }

    auto keyed(const Relation& rel, std::size_t col) -> std::vector<Routed> {
        std::vector<Routed> out;
        out.reserve(rel.rows());
        for (const auto& c : rel.chunks) {
            for_rows(c, [&](RowBytes r) {
                if (auto k = join_key(*rel.codec, r, col)) out.push_back({*k, r});
            });
        }
        return out;
    }

    static auto bytes_of(const Relation& rel) -> std::size_t {
        std::size_t n = 0;
        for (const auto& c : rel.chunks) for_rows(c, [&](RowBytes r) { n += r.size(); });
        return n;
    }

    auto visit(const physical::IndexedEquiJoin& j, const PhysicalPlan& pp) -> Relation {
        auto probe = run(*j.probe);
        const auto& df = j.build;
        const auto partitions = df.num_partitions();
        const auto& bcodec = df.codec();
        const auto bcol = df.index_col();
        const auto& pcodec = *probe.codec;
        const bool utf8 = bcodec.schema().column(bcol).type == ColumnType::kUtf8;

        std::vector<std::vector<Routed>> routed;
        std::vector<Routed> everything;
        std::vector<std::size_t> received(partitions, 0);
        if (j.broadcast) {
            everything = keyed(probe, j.probe_col);
            const auto total = bytes_of(probe);
            std::fill(received.begin(), received.end(), total);
            if (stats_ != nullptr) {
                stats_->shuffle_bytes += total * partitions;
                stats_->shuffle_messages += everything.size() * partitions;
            }
        } else {
            routed = shuffle(probe, j.probe_col, partitions);
            for (std::size_t p = 0; p < partitions; ++p) {
                for (const auto& r : routed[p]) received[p] += r.row.size();
            }
        }
        if (stats_ != nullptr) stats_->partition_bytes = received;

        std::vector<std::shared_ptr<const PlainTable>> outs(partitions);
        std::atomic<std::size_t> busy{0};
        parallel(partitions, [&](std::size_t p) {
            const auto& rows = j.broadcast ? everything : routed[p];
            auto t = std::make_shared<PlainTable>(pp.schema);
            outs[p] = t;
            if (rows.empty()) return;
            busy.fetch_add(1, std::memory_order_relaxed);
            const auto& part = df.partition(p);
            for (const auto& pr : rows) {
                std::optional<std::string_view> verify;
                if (utf8) verify = pcodec.string_cell(pr.row, j.probe_col);
                part.for_each_match(pr.key, verify, [&](RowBytes b) {
                    t->emplace_encoded([&](std::vector<std::uint8_t>& arena) {
                        if (j.build_is_left) RowCodec::concat_into(bcodec, b, pcodec, pr.row, arena);
                        else RowCodec::concat_into(pcodec, pr.row, bcodec, b, arena);
                    });
                });
            }
        });
        touched(busy.load());
        Relation rel{std::make_shared<const RowCodec>(pp.schema), {}};
        for (auto& t : outs) {
            if (!t->empty()) rel.chunks.push_back(whole(std::move(t)));
        }
        return rel;
    }

    /// Hash table over `build` rows; the value lists keep input order.
    static auto build_table(const std::vector<Routed>& build)
        -> std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> {
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> table;
        table.reserve(build.size());
        for (std::uint32_t i = 0; i < build.size(); ++i) table[build[i].key.raw].push_back(i);
        return table;
    }

    auto visit(const physical::HashJoin& j, const PhysicalPlan& pp) -> Relation {
        auto left = run(*j.left);
        auto right = run(*j.right);
        const auto& lcodec = *left.codec;
        const auto& rcodec = *right.codec;
        // Build on the smaller side, as the baseline planner would.
        const bool build_left = bytes_of(left) <= bytes_of(right);

        auto emit = [&](PlainTable& out, const std::vector<Routed>& build, const auto& table, const Routed& s) {
            auto it = table.find(s.key.raw);
            if (it == table.end()) return;
            for (auto i : it->second) {
                const auto& b = build[i];
                const auto& l = build_left ? b : s;
                const auto& r = build_left ? s : b;
                if (!same_key(lcodec, l.row, j.left_col, rcodec, r.row, j.right_col)) continue;
                out.emplace_encoded(
                    [&](std::vector<std::uint8_t>& arena) { RowCodec::concat_into(lcodec, l.row, rcodec, r.row, arena); });
            }
        };

        std::vector<std::shared_ptr<const PlainTable>> outs;
        if (j.broadcast) {
            const auto& small = build_left ? left : right;
            const auto build = keyed(small, build_left ? j.left_col : j.right_col);
            const auto table = build_table(build);
            const auto& stream = build_left ? right : left;
            const auto scol = build_left ? j.right_col : j.left_col;
            if (stats_ != nullptr) {
                stats_->shuffle_bytes += bytes_of(small) * j.partitions;
                stats_->shuffle_messages += build.size() * j.partitions;
            }
            outs.resize(stream.chunks.size());
            parallel(stream.chunks.size(), [&](std::size_t i) {
                auto t = std::make_shared<PlainTable>(pp.schema);
                const auto& codec = *stream.codec;
                for_rows(stream.chunks[i], [&](RowBytes r) {
                    if (auto k = join_key(codec, r, scol)) emit(*t, build, table, Routed{*k, r});
                });
                outs[i] = std::move(t);
            });
            touched(j.partitions);
        } else {
            auto ls = shuffle(left, j.left_col, j.partitions);
            auto rs = shuffle(right, j.right_col, j.partitions);
            outs.resize(j.partitions);
            std::atomic<std::size_t> busy{0};
            parallel(j.partitions, [&](std::size_t p) {
                auto t = std::make_shared<PlainTable>(pp.schema);
                const auto& build = build_left ? ls[p] : rs[p];
                const auto& stream = build_left ? rs[p] : ls[p];
                if (!build.empty() && !stream.empty()) {
                    busy.fetch_add(1, std::memory_order_relaxed);
                    const auto table = build_table(build);
                    for (const auto& s : stream) emit(*t, build, table, s);
                }
                outs[p] = std::move(t);
            });
            touched(busy.load());
        }
        Relation rel{std::make_shared<const RowCodec>(pp.schema), {}};
        for (auto& t : outs) {
            if (!t->empty()) rel.chunks.push_back(whole(std::move(t)));
        }
        return rel;
    }

    std::size_t threads_;
    ExecStats* stats_;
};

}  // namespace

auto execute(const PhysicalPlan& pp, const ExecOptions& options, ExecStats* stats) -> PlainTable {
    Executor ex(options, stats);
    auto rel = ex.run(pp);
    if (rel.chunks.size() == 1 && rel.chunks[0].begin == 0 && rel.chunks[0].end == rel.chunks[0].table->size() &&
        rel.chunks[0].table->schema() == pp.schema) {
        return *rel.chunks[0].table;
    }
    PlainTable out(pp.schema);
    std::size_t rows = 0;
    std::size_t bytes = 0;
    for (const auto& c : rel.chunks) {
        rows += c.size();
        if (c.size() > 0) {
            bytes += c.end == c.table->size() && c.begin == 0 ? c.table->byte_size() : 0;
        }
    }
    out.reserve(rows, bytes);
    for (const auto& c : rel.chunks) for_rows(c, [&](RowBytes r) { out.add_payload_unchecked(r); });
    return out;
}

}  // namespace ixframe
