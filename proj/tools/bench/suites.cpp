#include "suites.hpp"

#include <ixframe/cluster.hpp>
#include <ixframe/dataframe.hpp>
#include <ixframe/datagen.hpp>
#include <ixframe/engine.hpp>
#include <ixframe/error.hpp>
#include <ixframe/parallel.hpp>
#include <ixframe/replay_log.hpp>

#include <fmt/format.h>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <random>

namespace ixframe::bench {

namespace {

constexpr double kMiB = 1024.0 * 1024.0;

template <class F>
auto time_ms(F&& f) -> double {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
auto repeat(std::size_t n, F&& f) -> std::vector<double> {
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(time_ms(f));
    return out;
}

auto mix64(std::uint64_t x) -> std::uint64_t {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Order-independent digest of a row multiset: two sums of per-row hashes.
struct Fingerprint {
    std::size_t rows = 0;
    std::uint64_t sum = 0;
    std::uint64_t sum2 = 0;
    friend auto operator==(const Fingerprint&, const Fingerprint&) -> bool = default;
};

auto fingerprint(const PlainTable& t) -> Fingerprint {
    Fingerprint f;
    f.rows = t.size();
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto b : t.row(i)) {
            h ^= static_cast<std::uint8_t>(b);
            h *= 1099511628211ULL;
        }
        const auto m = mix64(h);
        f.sum += m;
        f.sum2 += mix64(m ^ 0x9e3779b97f4a7c15ULL);
    }
    return f;
}

void require_same(const PlainTable& indexed, const PlainTable& baseline, std::string_view what) {
    if (fingerprint(indexed) != fingerprint(baseline))
        raise(ErrorCode::kExecFailure, fmt::format("{}: indexed result ({} rows) differs from the baseline ({} rows)",
                                                   what, indexed.size(), baseline.size()));
}

auto size_label(std::size_t bytes) -> std::string {
    if (bytes >= (1u << 20) && bytes % (1u << 20) == 0) return fmt::format("{}MB", bytes >> 20);
    if (bytes >= 1024 && bytes % 1024 == 0) return fmt::format("{}KB", bytes >> 10);
    return fmt::format("{}B", bytes);
}

auto scaled(std::size_t rows, double frac) -> std::size_t {
    return static_cast<std::size_t>(std::llround(static_cast<double>(rows) * frac));
}

// Sizes for the given fractions of `rows`, at least 1 for non-zero
// fractions, duplicates dropped.
auto scaled_sizes(std::size_t rows, std::initializer_list<double> fracs) -> std::vector<std::size_t> {
    std::vector<std::size_t> out;
    for (double f : fracs) {
        auto n = scaled(rows, f);
        if (f > 0) n = std::max<std::size_t>(n, 1);
        if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    }
    return out;
}

struct Ctx {
    const BenchConfig& cfg;
    const Progress& progress;

    void say(const std::string& msg) const {
        if (progress) progress(msg);
    }
    [[nodiscard]] auto partitions() const -> std::size_t {
        return cfg.partitions ? cfg.partitions : default_partition_count();
    }
    [[nodiscard]] auto threads() const -> std::size_t {
        return cfg.threads ? cfg.threads : default_thread_count();
    }
    [[nodiscard]] auto index_options() const -> IndexOptions {
        IndexOptions o;
        o.partitions = partitions();
        o.partition.batch_bytes = cfg.batch_bytes;
        o.threads = threads();
        return o;
    }
    [[nodiscard]] auto planner(bool use_index) const -> PlannerOptions {
        return {cfg.broadcast_threshold, use_index, partitions(), false};
    }
    [[nodiscard]] auto exec() const -> ExecOptions { return {threads()}; }
    [[nodiscard]] auto cap() const -> std::size_t { return cfg.memory_cap ? cfg.memory_cap : default_memory_cap(); }

    void guard(std::string_view suite, double projected) const {
        if (projected > static_cast<double>(cap()))
            raise(ErrorCode::kOOMGuard,
                  fmt::format("{}: projected footprint {:.0f} MiB exceeds the {:.0f} MiB cap "
                              "(lower --build-rows or raise --memory-cap)",
                              suite, projected / kMiB, static_cast<double>(cap()) / kMiB));
    }

    [[nodiscard]] auto report(std::string suite) const -> BenchReport {
        BenchReport r;
        r.suite = std::move(suite);
        r.config = {
            {"seed", std::to_string(cfg.seed)},
            {"build_rows", std::to_string(cfg.build_rows)},
            {"rows_per_key", format_number(cfg.rows_per_key)},
            {"partitions", std::to_string(partitions())},
            {"batch_bytes", std::to_string(cfg.batch_bytes)},
            {"broadcast_threshold", std::to_string(cfg.broadcast_threshold)},
            {"executors", std::to_string(cfg.executors)},
            {"threads", std::to_string(threads())},
            {"reps", std::to_string(cfg.reps)},
            {"queries", std::to_string(cfg.queries)},
            {"memory_cap", std::to_string(cap())},
        };
        return r;
    }
};

// Per-row footprints used by the OOM projection, from the encoded row size.
auto plain_row(double r) -> double { return r + 8; }
auto indexed_row(double r) -> double { return r + 24; }
auto hash_join_row(double r) -> double { return 2 * (r + 8) + 32; }

auto row_bytes(const GenSpec& spec) -> double {
    return static_cast<double>(RowCodec(gen_schema(spec)).min_size());
}

struct Fixture {
    GenSpec spec;
    std::shared_ptr<const PlainTable> plain;
    IndexedDataFrame df;
    double build_s = 0.0;
};

auto make_fixture(const Ctx& ctx) -> Fixture {
    auto spec = edge_spec(ctx.cfg.build_rows, ctx.cfg.rows_per_key, ctx.cfg.seed);
    ctx.say(fmt::format("generating {} edge rows", spec.row_count));
    auto plain = std::make_shared<const PlainTable>(generate(spec));
    ctx.say("building the index");
    const auto t0 = std::chrono::steady_clock::now();
    auto df = IndexedDataFrame::create_index(*plain, 0, ctx.index_options());
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Fixture{std::move(spec), std::move(plain), std::move(df), s};
}

auto build_note(const Fixture& fx) -> std::string {
    return fmt::format("index built in {:.3f} s ({:.0f} rows/s), excluded from query timings", fx.build_s,
                       static_cast<double>(fx.plain->size()) / std::max(fx.build_s, 1e-9));
}

// More rows over the same key range as the fixture.
auto more_rows(const GenSpec& base, std::size_t n, std::uint64_t seed) -> PlainTable {
    auto s = base;
    s.row_count = n;
    s.seed = seed;
    return generate(s);
}

auto make_probe(const GenSpec& base, std::size_t n, std::uint64_t seed) -> std::shared_ptr<const PlainTable> {
    GenSpec s;
    s.row_count = n;
    s.key_name = "pkey";
    s.key = base.key;
    s.payload = {{"tag", ColumnType::kInt64, 0.0, 0}};
    s.seed = seed;
    return std::make_shared<const PlainTable>(generate(s));
}

auto join_plan() -> LogicalPtr { return equi_join(scan("probe"), scan("edges"), "pkey", "src"); }

auto union_of(const PlainTable& base, const std::vector<PlainTable>& more) -> PlainTable {
    std::size_t rows = base.size();
    std::size_t bytes = base.byte_size();
    for (const auto& m : more) {
        rows += m.size();
        bytes += m.byte_size();
    }
    PlainTable u(base.schema());
    u.reserve(rows, bytes);
    u.append_table(base);
    for (const auto& m : more) u.append_table(m);
    return u;
}

auto join_scale(const Ctx& ctx) -> BenchReport {
    const auto& cfg = ctx.cfg;
    std::vector<std::pair<std::string, std::size_t>> cases;
    if (cfg.probe_rows.empty()) {
        cases = {{"S", scaled(cfg.build_rows, 1e-4)},
                 {"M", scaled(cfg.build_rows, 1e-3)},
                 {"L", scaled(cfg.build_rows, 1e-2)},
                 {"XL", scaled(cfg.build_rows, 1e-1)}};
    } else {
        for (std::size_t i = 0; i < cfg.probe_rows.size(); ++i)
            cases.emplace_back(fmt::format("P{}", i + 1), cfg.probe_rows[i]);
    }
    const auto r = row_bytes(edge_spec(cfg.build_rows, cfg.rows_per_key, cfg.seed));
    std::size_t max_probe = 0;
    for (const auto& c : cases) max_probe = std::max(max_probe, c.second);
    const double b = static_cast<double>(cfg.build_rows);
    ctx.guard("join-scale", b * (plain_row(r) + indexed_row(r) + hash_join_row(r)) +
                                static_cast<double>(max_probe) * (cfg.rows_per_key + 1) * (2 * r + 24));

    auto fx = make_fixture(ctx);
    Catalog icat;
    Catalog bcat;
    icat.put("edges", fx.df);
    bcat.put("edges", fx.plain);

    auto rep = ctx.report("join-scale");
    rep.ratio_label = "speedup = baseline median / indexed median";
    rep.notes.push_back(build_note(fx));
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& [label, n] = cases[i];
        ctx.say(fmt::format("join-scale {} with {} probe rows", label, n));
        const auto probe = make_probe(fx.spec, n, cfg.seed + 1 + i);
        icat.put("probe", probe);
        bcat.put("probe", probe);
        const auto lp = join_plan();
        const auto ipp = plan(*lp, icat, ctx.planner(true));
        const auto bpp = plan(*lp, bcat, ctx.planner(false));
        std::size_t rows = 0;
        {
            const auto a = execute(*ipp, ctx.exec());
            const auto bres = execute(*bpp, ctx.exec());
            require_same(a, bres, fmt::format("join-scale {}", label));
            rows = a.size();
        }
        const auto ti = repeat(cfg.reps, [&] { execute(*ipp, ctx.exec()); });
        const auto tb = repeat(cfg.reps, [&] { execute(*bpp, ctx.exec()); });
        BenchRow row;
        row.name = fmt::format("{} ({} probe rows)", label, n);
        row.indexed = summarize(ti);
        row.baseline = summarize(tb);
        if (n > 0) row.ratio = row.baseline->median / row.indexed.median;
        row.result_rows = rows;
        rep.rows.push_back(row);
        rep.notes.push_back(fmt::format("{}: probe/build {:.0e}, {} vs {}", label,
                                        static_cast<double>(n) / std::max(b, 1.0), operator_name(*ipp),
                                        operator_name(*bpp)));
    }
    return rep;
}

auto read_latency(const Ctx& ctx) -> BenchReport {
    const auto& cfg = ctx.cfg;
    const auto sizes = scaled_sizes(cfg.build_rows, {0.0, 1e-5, 1e-4, 1e-3, 1e-2});
    const auto probe_n = std::max<std::size_t>(1, scaled(cfg.build_rows, 1e-4));
    const double appends = static_cast<double>(cfg.queries / cfg.append_every);
    const auto r = row_bytes(edge_spec(cfg.build_rows, cfg.rows_per_key, cfg.seed));
    const double b = static_cast<double>(cfg.build_rows);
    const double grown = b + appends * static_cast<double>(sizes.back());
    ctx.guard("read-latency-under-appends",
              b * (plain_row(r) + indexed_row(r)) + grown * (plain_row(r) + hash_join_row(r)) +
                  appends * static_cast<double>(sizes.back()) * (plain_row(r) + indexed_row(r)));

    auto fx = make_fixture(ctx);
    const auto probe = make_probe(fx.spec, probe_n, cfg.seed + 1);
    const auto lp = join_plan();

    auto rep = ctx.report("read-latency-under-appends");
    rep.ratio_label = "read slowdown = mean join latency / mean join latency without appends";
    rep.notes.push_back(build_note(fx));
    rep.notes.push_back(fmt::format(
        "{} joins of {} probe rows per case; an append issued every {} joins is applied lazily, inside the join "
        "that follows it",
        cfg.queries, probe_n, cfg.append_every));
    rep.notes.push_back("baseline: ShuffleHashJoin over the plain table unioned with the same appended rows");
    std::optional<double> quiet_mean;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const auto w = sizes[k];
        const auto name = w == 0 ? std::string("no appends") : fmt::format("{} rows every {} joins", w, cfg.append_every);
        ctx.say(fmt::format("read-latency {}", name));
        auto df = fx.df;
        Catalog icat;
        icat.put("probe", probe);
        icat.put("edges", df);
        std::vector<PlainTable> batches;
        std::vector<double> lat;
        lat.reserve(cfg.queries);
        for (std::size_t q = 0; q < cfg.queries; ++q) {
            const bool app = w > 0 && q > 0 && q % cfg.append_every == 0;
            PlainTable batch;
            if (app) batch = more_rows(fx.spec, w, cfg.seed + 7919 * (k + 1) + q);
            lat.push_back(time_ms([&] {
                if (app) {
                    df = df.append_rows(batch);
                    icat.put("edges", df);
                }
                execute(*plan(*lp, icat, ctx.planner(true)), ctx.exec());
            }));
            if (app) batches.push_back(std::move(batch));
        }

        Catalog bcat;
        bcat.put("probe", probe);
        bcat.put("edges", std::make_shared<const PlainTable>(union_of(*fx.plain, batches)));
        const auto bpp = plan(*lp, bcat, ctx.planner(false));
        std::size_t rows = 0;
        {
            const auto a = execute(*plan(*lp, icat, ctx.planner(true)), ctx.exec());
            const auto bres = execute(*bpp, ctx.exec());
            require_same(a, bres, fmt::format("read-latency {}", name));
            rows = a.size();
        }
        const auto tb = repeat(cfg.reps, [&] { execute(*bpp, ctx.exec()); });

        BenchRow row;
        row.name = name;
        row.indexed = summarize(lat);
        row.baseline = summarize(tb);
        if (w == 0) quiet_mean = row.indexed.mean;
        if (quiet_mean && *quiet_mean > 0) row.ratio = row.indexed.mean / *quiet_mean;
        row.result_rows = rows;
        rep.rows.push_back(row);
        rep.notes.push_back(fmt::format("{}: {} appends, {} rows in the final version, slowest join {:.3f} ms", name,
                                        batches.size(), df.row_count(), *std::max_element(lat.begin(), lat.end())));
    }
    return rep;
}

auto write_throughput(const Ctx& ctx) -> BenchReport {
    const auto& cfg = ctx.cfg;
    const auto sizes = scaled_sizes(cfg.build_rows, {1e-5, 1e-4, 1e-3, 1e-2});
    const auto r = row_bytes(edge_spec(cfg.build_rows, cfg.rows_per_key, cfg.seed));
    const double b = static_cast<double>(cfg.build_rows);
    const double grown = static_cast<double>(cfg.reps) * static_cast<double>(sizes.back());
    ctx.guard("write-throughput", b * (3 * plain_row(r) + indexed_row(r)) + grown * (2 * plain_row(r) + indexed_row(r)));

    auto fx = make_fixture(ctx);
    auto rep = ctx.report("write-throughput");
    rep.ratio_label = "speedup = baseline median / indexed median";
    rep.notes.push_back(build_note(fx));
    rep.notes.push_back(fmt::format(
        "{} chained appends per case; baseline: union of the plain table with the batch, materialised again",
        cfg.reps));
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const auto w = sizes[k];
        ctx.say(fmt::format("write-throughput {} rows", w));
        auto df = fx.df;
        auto cur = fx.plain;
        std::vector<double> ti;
        std::vector<double> tb;
        PlainTable last;
        for (std::size_t i = 0; i < cfg.reps; ++i) {
            auto batch = more_rows(fx.spec, w, cfg.seed + 104729 * (k + 1) + i);
            ti.push_back(time_ms([&] { df = df.append_rows(batch); }));
            tb.push_back(time_ms([&] { cur = std::make_shared<const PlainTable>(union_of(*cur, {batch})); }));
            last = std::move(batch);
        }
        if (df.row_count() != cur->size())
            raise(ErrorCode::kExecFailure, fmt::format("write-throughput {}: {} indexed rows vs {} baseline rows", w,
                                                       df.row_count(), cur->size()));
        Catalog bcat;
        bcat.put("edges", cur);
        for (std::size_t j = 0; j < std::min<std::size_t>(8, last.size()); ++j) {
            const auto key = last.codec().cell(last.row(j), 0);
            const auto expect = execute(*plan(*filter(scan("edges"), "src", Predicate::eq(key)), bcat,
                                              ctx.planner(false)),
                                        ctx.exec());
            require_same(df.get_rows(key), expect, fmt::format("write-throughput {} lookup", w));
        }
        BenchRow row;
        row.name = fmt::format("append {} rows", w);
        row.indexed = summarize(ti);
        row.baseline = summarize(tb);
        row.ratio = row.baseline->median / row.indexed.median;
        row.result_rows = df.row_count();
        rep.rows.push_back(row);
        const double wd = static_cast<double>(w);
        rep.notes.push_back(fmt::format("{} rows: indexed {:.0f} rows/s, baseline {:.0f} rows/s", w,
                                        wd / (row.indexed.median / 1e3), wd / (row.baseline->median / 1e3)));
    }
    return rep;
}

auto batch_size_sweep(const Ctx& ctx) -> BenchReport {
    const auto& cfg = ctx.cfg;
    const std::vector<std::size_t> sizes = {4u << 10, 64u << 10, 512u << 10, 4u << 20, 32u << 20};
    const auto spec = edge_spec(cfg.build_rows, cfg.rows_per_key, cfg.seed);
    const auto r = row_bytes(spec);
    const double b = static_cast<double>(cfg.build_rows);
    ctx.guard("batch-size-sweep", b * (plain_row(r) + indexed_row(r) + hash_join_row(r)));

    ctx.say(fmt::format("generating {} edge rows", spec.row_count));
    const auto plain = std::make_shared<const PlainTable>(generate(spec));
    const auto probe = make_probe(spec, std::max<std::size_t>(1, scaled(cfg.build_rows, 1e-4)), cfg.seed + 1);
    const auto write_n = std::max<std::size_t>(1, scaled(cfg.build_rows, 1e-4));
    const auto lp = join_plan();
    Fingerprint expect;
    {
        Catalog bcat;
        bcat.put("edges", plain);
        bcat.put("probe", probe);
        expect = fingerprint(execute(*plan(*lp, bcat, ctx.planner(false)), ctx.exec()));
    }

    auto rep = ctx.report("batch-size-sweep");
    rep.ratio_label = "performance normalized to 4KB batches = 4KB median / median (above 1 is faster)";
    rep.notes.push_back(fmt::format("reads: joins of {} probe rows; writes: chained appends of {} rows",
                                    probe->size(), write_n));
    std::optional<Summary> read4;
    std::optional<Summary> write4;
    for (const auto size : sizes) {
        const auto label = size_label(size);
        if (size > kMaxBatchBytes) {
            for (const char* kind : {"read", "write"}) {
                BenchRow row;
                row.name = fmt::format("{} {}", label, kind);
                row.check = "unsupported";
                rep.rows.push_back(row);
            }
            rep.notes.push_back(fmt::format("{}: unsupported, row pointers carry a 22-bit offset so a batch holds at "
                                            "most {}",
                                            label, size_label(kMaxBatchBytes)));
            continue;
        }
        ctx.say(fmt::format("batch-size-sweep {}", label));
        auto opts = ctx.index_options();
        opts.partition.batch_bytes = static_cast<std::uint32_t>(size);
        const auto t0 = std::chrono::steady_clock::now();
        auto df = IndexedDataFrame::create_index(*plain, 0, opts);
        const double build_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        Catalog icat;
        icat.put("edges", df);
        icat.put("probe", probe);
        const auto ipp = plan(*lp, icat, ctx.planner(true));
        const auto first = execute(*ipp, ctx.exec());
        if (fingerprint(first) != expect)
            raise(ErrorCode::kExecFailure, fmt::format("batch-size-sweep {}: join differs from the baseline", label));
        const auto tr = repeat(cfg.reps, [&] { execute(*ipp, ctx.exec()); });

        std::vector<double> tw;
        for (std::size_t i = 0; i < cfg.reps; ++i) {
            const auto batch = more_rows(spec, write_n, cfg.seed + 31 * (i + 1));
            tw.push_back(time_ms([&] { df = df.append_rows(batch); }));
        }
        if (df.row_count() != plain->size() + cfg.reps * write_n)
            raise(ErrorCode::kExecFailure, fmt::format("batch-size-sweep {}: row count {} after appends", label,
                                                       df.row_count()));

        const auto sr = summarize(tr);
        const auto sw = summarize(tw);
        if (!read4) {
            read4 = sr;
            write4 = sw;
        }
        BenchRow rr;
        rr.name = label + " read";
        rr.indexed = sr;
        rr.baseline = read4;
        rr.ratio = read4->median / sr.median;
        rr.result_rows = first.size();
        rep.rows.push_back(rr);
        BenchRow rw;
        rw.name = label + " write";
        rw.indexed = sw;
        rw.baseline = write4;
        rw.ratio = write4->median / sw.median;
        rw.result_rows = df.row_count();
        rep.rows.push_back(rw);
        rep.notes.push_back(fmt::format("{}: index built in {:.3f} s, {} batches in the last version", label, build_s,
                                        [&] {
                                            std::size_t n = 0;
                                            for (std::size_t p = 0; p < df.num_partitions(); ++p)
                                                n += df.partition(p).batch_count();
                                            return n;
                                        }()));
    }
    return rep;
}

auto memory_overhead(const Ctx& ctx) -> BenchReport {
    const auto& cfg = ctx.cfg;
    const auto r = row_bytes(edge_spec(cfg.build_rows, cfg.rows_per_key, cfg.seed));
    ctx.guard("memory-overhead", static_cast<double>(cfg.build_rows) * (plain_row(r) + indexed_row(r)));

    auto fx = make_fixture(ctx);
    const auto st = fx.df.stats();
    std::size_t data = 0;
    for (const auto& p : st.partitions) data += p.data_bytes;
    if (st.row_count != fx.plain->size() || data != st.data_bytes)
        raise(ErrorCode::kExecFailure, fmt::format("memory-overhead: {} rows and {} data bytes over partitions, "
                                                   "expected {} rows and {} bytes",
                                                   st.row_count, data, fx.plain->size(), st.data_bytes));

    auto rep = ctx.report("memory-overhead");
    rep.ratio_label = "index overhead = index bytes / data bytes";
    rep.notes.push_back(build_note(fx));
    rep.notes.push_back(
        "index bytes: trie nodes and entries; data bytes: stored row payloads; sizes are exact, so each is measured once");
    auto bytes_row = [](std::string name, std::size_t num, std::size_t den, std::size_t rows) {
        BenchRow row;
        row.name = std::move(name);
        row.unit = "bytes";
        const double n = static_cast<double>(num);
        const double d = static_cast<double>(den);
        row.indexed = Summary{1, n, n, n, n};
        row.baseline = Summary{1, d, d, d, d};
        if (den > 0) row.ratio = n / d;
        row.result_rows = rows;
        return row;
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < st.partitions.size(); ++i) {
        const auto& p = st.partitions[i];
        rep.rows.push_back(bytes_row(fmt::format("partition {}", i), p.index_bytes, p.data_bytes, 0));
        if (p.data_bytes > 0)
            worst = std::max(worst, static_cast<double>(p.index_bytes) / static_cast<double>(p.data_bytes));
    }
    rep.rows.push_back(bytes_row("total", st.index_bytes, st.data_bytes, st.row_count));
    rep.rows.push_back(bytes_row("total back-pointers", st.backptr_bytes, st.data_bytes, st.row_count));
    rep.notes.push_back(fmt::format("largest partition ratio {:.4f}; the plain table holds {} payload bytes", worst,
                                    fx.plain->byte_size()));
    return rep;
}

auto fault_tolerance(const Ctx& ctx) -> BenchReport {
    const auto& cfg = ctx.cfg;
    if (cfg.queries < 3) raise(ErrorCode::kInvalidSpec, "fault-tolerance needs at least 3 queries");
    const auto r = row_bytes(edge_spec(cfg.build_rows, cfg.rows_per_key, cfg.seed));
    ctx.guard("fault-tolerance", static_cast<double>(cfg.build_rows) * (plain_row(r) + 3 * indexed_row(r)));

    auto fx = make_fixture(ctx);
    const auto log = ReplayLog::for_frame(fx.df, *fx.plain);
    ClusterOptions opts;
    opts.executors = cfg.executors;
    opts.seed = cfg.seed;
    ctx.say("starting the reference and victim clusters");
    Cluster ref(log, opts);
    Cluster vic(log, opts);
    if (vic.num_executors() < 2)
        raise(ErrorCode::kInvalidSpec, "fault-tolerance needs at least 2 executors (check --executors and IXFRAME_THREADS)");

    const auto probe_n = std::max<std::size_t>(1, scaled(cfg.build_rows, 1e-4));
    std::vector<std::shared_ptr<const PlainTable>> probes;
    for (std::size_t i = 0; i < 8; ++i) probes.push_back(make_probe(fx.spec, probe_n, cfg.seed + 100 + i));

    const auto victim = vic.primary(0).value();
    std::size_t lost = 0;
    for (std::size_t p = 0; p < vic.num_partitions(); ++p) lost += vic.primary(p) == victim ? 1 : 0;
    const auto kill_q = std::min<std::size_t>(19, cfg.queries - 2);

    std::vector<double> tr;
    std::vector<double> tv;
    std::size_t rows = 0;
    for (std::size_t q = 0; q < cfg.queries; ++q) {
        if (q % 50 == 0) ctx.say(fmt::format("fault-tolerance query {}/{}", q + 1, cfg.queries));
        const auto& probe = *probes[q % probes.size()];
        if (q == kill_q) vic.kill_after(victim, 2);
        PlainTable a;
        PlainTable bres;
        tv.push_back(time_ms([&] { a = vic.join(probe, 0); }));
        tr.push_back(time_ms([&] { bres = ref.join(probe, 0); }));
        require_same(a, bres, fmt::format("fault-tolerance query {}", q + 1));
        rows += a.size();
    }
    if (vic.alive(victim))
        raise(ErrorCode::kExecFailure, fmt::format("fault-tolerance: executor {} survived its kill", victim));

    auto slice = [](const std::vector<double>& v, std::size_t from, std::size_t to) {
        return summarize(std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(from),
                                             v.begin() + static_cast<std::ptrdiff_t>(to)));
    };
    auto rep = ctx.report("fault-tolerance");
    rep.ratio_label = "slowdown = median with the failure / median of the same queries on a cluster without failures";
    rep.notes.push_back(build_note(fx));
    auto add = [&](std::string name, std::size_t from, std::size_t to) {
        BenchRow row;
        row.name = std::move(name);
        row.indexed = slice(tv, from, to);
        row.baseline = slice(tr, from, to);
        row.ratio = row.indexed.median / row.baseline->median;
        row.result_rows = rows;
        rep.rows.push_back(row);
    };
    if (kill_q > 0) add(fmt::format("pre-failure (queries 1-{})", kill_q), 0, kill_q);
    add(fmt::format("failure (query {})", kill_q + 1), kill_q, kill_q + 1);
    add(fmt::format("post-recovery (queries {}-{})", kill_q + 2, cfg.queries), kill_q + 1, cfg.queries);

    const auto& st = vic.stats();
    double rebuild_s = 0.0;
    for (double s : st.rebuild_seconds) rebuild_s += s;
    const double pre = kill_q > 0 ? slice(tv, 0, kill_q).median : tv.front();
    std::size_t spikes = 0;
    for (std::size_t q = kill_q + 1; q < tv.size(); ++q) spikes += tv[q] > 3 * pre ? 1 : 0;
    rep.notes.push_back(fmt::format("{} joins of {} probe rows over {} executors; executor {} (primary of {} "
                                    "partitions) killed two dispatches into query {}",
                                    cfg.queries, probe_n, vic.num_executors(), victim, lost, kill_q + 1));
    rep.notes.push_back(fmt::format("{} partition rebuilds taking {:.3f} s in total; {} later queries over 3x the "
                                    "pre-failure median",
                                    st.rebuilds, rebuild_s, spikes));
    rep.notes.push_back("rows column: total result rows over the sequence, checked query by query against the reference");
    return rep;
}

auto microbench_ops(const Ctx& ctx) -> BenchReport {
    const auto& cfg = ctx.cfg;
    const auto r = row_bytes(edge_spec(cfg.build_rows, cfg.rows_per_key, cfg.seed));
    ctx.guard("microbench-ops", static_cast<double>(cfg.build_rows) * (3 * plain_row(r) + indexed_row(r)));

    auto fx = make_fixture(ctx);
    const auto probe = make_probe(fx.spec, std::max<std::size_t>(1, scaled(cfg.build_rows, 1e-4)), cfg.seed + 1);
    Catalog icat;
    Catalog bcat;
    icat.put("edges", fx.df);
    icat.put("probe", probe);
    bcat.put("edges", fx.plain);
    bcat.put("probe", probe);

    const auto lo = fx.spec.key.lo;
    const auto keys = fx.spec.key.hi - lo + 1;
    std::mt19937_64 rng(cfg.seed + 3);
    std::vector<std::int64_t> lookups;
    for (std::size_t i = 0; i < cfg.reps; ++i)
        lookups.push_back(lo + static_cast<std::int64_t>(bounded(rng, static_cast<std::uint64_t>(keys))));

    struct Op {
        std::string name;
        std::function<LogicalPtr(std::size_t)> make;
    };
    const std::vector<Op> ops = {
        {"join S", [](std::size_t) { return join_plan(); }},
        {"filter eq", [&](std::size_t i) { return filter(scan("edges"), "src", Predicate::eq(Value{lookups[i]})); }},
        {"filter range",
         [&](std::size_t) {
             return filter(scan("edges"), "src", Predicate::range(Value{lo}, Value{lo + std::max<std::int64_t>(keys / 100, 1) - 1}));
         }},
        {"project", [](std::size_t) { return project(scan("edges"), {"dst", "weight"}); }},
        {"aggregate max", [](std::size_t) { return aggregate(scan("edges"), {}, AggKind::kMax, "weight"); }},
        {"scan", [](std::size_t) { return scan("edges"); }},
    };

    auto rep = ctx.report("microbench-ops");
    rep.ratio_label = "speedup = baseline median / indexed median";
    rep.notes.push_back(build_note(fx));
    rep.notes.push_back("every repetition compares the indexed result with the baseline result");
    for (const auto& op : ops) {
        ctx.say(fmt::format("microbench-ops {}", op.name));
        std::vector<double> ti;
        std::vector<double> tb;
        std::size_t rows = 0;
        std::string names;
        for (std::size_t i = 0; i < cfg.reps; ++i) {
            const auto lp = op.make(i);
            PlainTable a;
            PlainTable bres;
            PhysicalPtr ipp;
            PhysicalPtr bpp;
            ti.push_back(time_ms([&] {
                ipp = plan(*lp, icat, ctx.planner(true));
                a = execute(*ipp, ctx.exec());
            }));
            tb.push_back(time_ms([&] {
                bpp = plan(*lp, bcat, ctx.planner(false));
                bres = execute(*bpp, ctx.exec());
            }));
            require_same(a, bres, fmt::format("microbench-ops {}", op.name));
            rows = a.size();
            if (i == 0) names = fmt::format("{}: {} vs {}", op.name, operator_name(*ipp), operator_name(*bpp));
        }
        BenchRow row;
        row.name = op.name;
        row.indexed = summarize(ti);
        row.baseline = summarize(tb);
        row.ratio = row.baseline->median / row.indexed.median;
        row.result_rows = rows;
        rep.rows.push_back(row);
        rep.notes.push_back(names);
    }
    return rep;
}

using SuiteFn = BenchReport (*)(const Ctx&);

auto registry() -> const std::map<std::string, SuiteFn, std::less<>>& {
    static const std::map<std::string, SuiteFn, std::less<>> m = {
        {"join-scale", &join_scale},
        {"read-latency-under-appends", &read_latency},
        {"write-throughput", &write_throughput},
        {"batch-size-sweep", &batch_size_sweep},
        {"memory-overhead", &memory_overhead},
        {"fault-tolerance", &fault_tolerance},
        {"microbench-ops", &microbench_ops},
    };
    return m;
}

}  // namespace

auto default_memory_cap() -> std::size_t {
    const auto pages = sysconf(_SC_PHYS_PAGES);
    const auto page = sysconf(_SC_PAGE_SIZE);
    if (pages <= 0 || page <= 0) return std::size_t{4} << 30;
    return static_cast<std::size_t>(static_cast<double>(pages) * static_cast<double>(page) * 0.8);
}

auto suite_names() -> const std::vector<std::string>& {
    static const std::vector<std::string> names = {
        "join-scale",      "read-latency-under-appends", "write-throughput", "batch-size-sweep",
        "memory-overhead", "fault-tolerance",            "microbench-ops",
    };
    return names;
}

auto run_suite(std::string_view name, const BenchConfig& cfg, const Progress& progress) -> BenchReport {
    const auto it = registry().find(name);
    if (it == registry().end()) raise(ErrorCode::kInvalidSpec, fmt::format("unknown bench suite '{}'", name));
    if (cfg.reps < 10) raise(ErrorCode::kInvalidSpec, "reps must be at least 10");
    if (cfg.build_rows == 0) raise(ErrorCode::kInvalidSpec, "build rows must be positive");
    if (!(cfg.rows_per_key > 0)) raise(ErrorCode::kInvalidSpec, "rows per key must be positive");
    if (cfg.queries == 0 || cfg.append_every == 0)
        raise(ErrorCode::kInvalidSpec, "queries and append interval must be positive");
    return it->second(Ctx{cfg, progress});
}

}  // namespace ixframe::bench
