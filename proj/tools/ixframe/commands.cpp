#include "commands.hpp"

#include <ixframe/csv.hpp>
#include <ixframe/dataframe.hpp>
#include <ixframe/datagen.hpp>
#include <ixframe/engine.hpp>
#include <ixframe/error.hpp>
#include <ixframe/parallel.hpp>
#include <ixframe/replay_log.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ixframe::cli {

namespace fs = std::filesystem;

namespace {

auto effective_threads(const GlobalOptions& g) -> std::size_t {
    auto n = g.threads ? g.threads : default_thread_count();
    if (const auto cap = thread_cap()) n = std::min(n, *cap);
    return std::max<std::size_t>(n, 1);
}

auto index_options(const GlobalOptions& g) -> ixframe::IndexOptions {
    ixframe::IndexOptions o;
    o.partitions = g.partitions;
    o.partition.batch_bytes = static_cast<std::uint32_t>(std::min<std::size_t>(g.batch_bytes, UINT32_MAX));
    o.threads = effective_threads(g);
    return o;
}

auto planner_options(const GlobalOptions& g, bool use_index) -> PlannerOptions {
    PlannerOptions o;
    o.broadcast_threshold = g.broadcast_threshold;
    o.use_index = use_index;
    o.shuffle_partitions = g.partitions;
    return o;
}

auto read_file(const fs::path& p) -> std::string {
    std::ifstream in(p, std::ios::binary);
    if (!in) raise(ErrorCode::kIoError, fmt::format("cannot open {}", p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to --out when given, stdout otherwise.
void emit(const GlobalOptions& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(g.out, std::ios::binary);
    if (!out) raise(ErrorCode::kIoError, fmt::format("cannot write {}", g.out));
    out << text;
    if (!out) raise(ErrorCode::kIoError, fmt::format("failed writing {}", g.out));
}

auto markdown_table(const PlainTable& t) -> std::string {
    const auto& cols = t.schema().columns();
    std::string out = "|";
    std::string rule = "|";
    for (const auto& c : cols) {
        out += fmt::format(" {} |", c.name);
        rule += "---|";
    }
    out += "\n" + rule + "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out += "|";
        for (const auto& v : t.decode(i)) {
            auto s = format_value(v);
            std::string esc;
            for (char c : s) {
                if (c == '|') esc += '\\';
                esc += c == '\n' ? ' ' : c;
            }
            out += fmt::format(" {} |", esc);
        }
        out += "\n";
    }
    return out;
}

auto render(const GlobalOptions& g, const PlainTable& t) -> std::string {
    if (g.format == Format::kMd) return markdown_table(t);
    std::ostringstream ss;
    write_csv(t, ss);
    return ss.str();
}

auto resolve_column(const Schema& schema, const std::string& text) -> std::size_t {
    if (const auto c = schema.find(text)) return *c;
    std::size_t n = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec == std::errc{} && p == text.data() + text.size() && n < schema.size()) return n;
    raise(ErrorCode::kUnresolvedColumn, fmt::format("no column '{}' in ({})", text, format_schema(schema)));
}

auto parse_cell(const std::string& text, ColumnType type) -> Value {
    auto bad = [&] {
        raise(ErrorCode::kParseError, fmt::format("'{}' is not a valid {}", text, column_type_name(type)));
    };
    const char* b = text.data();
    const char* e = text.data() + text.size();
    switch (type) {
        case ColumnType::kInt32: {
            std::int32_t v = 0;
            const auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc{} || p != e) bad();
            return v;
        }
        case ColumnType::kInt64: {
            std::int64_t v = 0;
            const auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc{} || p != e) bad();
            return v;
        }
        case ColumnType::kFloat64: {
            double v = 0;
            const auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc{} || p != e) bad();
            return v;
        }
        case ColumnType::kUtf8: return text;
    }
    bad();
    return {};
}

// The state directory holds the replay log of one indexed table and a small
// JSON file naming it.
struct State {
    std::string table;
    ReplayLog log;
};

auto log_path(const GlobalOptions& g) -> fs::path { return fs::path(g.state) / "log.ixlog"; }
auto meta_path(const GlobalOptions& g) -> fs::path { return fs::path(g.state) / "meta.json"; }

auto load_state(const GlobalOptions& g) -> State {
    if (!fs::exists(log_path(g)))
        raise(ErrorCode::kIoError, fmt::format("no index in {} (run 'ixframe index' first)", g.state));
    State s;
    try {
        s.table = nlohmann::json::parse(read_file(meta_path(g))).at("table").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::kCorruptLog, fmt::format("{}: {}", meta_path(g).string(), e.what()));
    }
    s.log = ReplayLog::load(log_path(g));
    return s;
}

void save_state(const GlobalOptions& g, const State& s, const std::string& source) {
    std::error_code ec;
    fs::create_directories(g.state, ec);
    if (ec) raise(ErrorCode::kIoError, fmt::format("cannot create {}: {}", g.state, ec.message()));
    const auto tmp = fs::path(g.state) / "log.ixlog.tmp";
    s.log.save(tmp);
    fs::rename(tmp, log_path(g), ec);
    if (ec) raise(ErrorCode::kIoError, fmt::format("cannot replace {}: {}", log_path(g).string(), ec.message()));
    if (!source.empty()) {
        nlohmann::json meta = {{"table", s.table}, {"source", source}};
        std::ofstream out(meta_path(g));
        out << meta.dump(2) << "\n";
        if (!out) raise(ErrorCode::kIoError, fmt::format("cannot write {}", meta_path(g).string()));
    }
}

auto max_version(const ReplayLog& log) -> std::uint64_t {
    const auto v = log.versions();
    return v.empty() ? 0 : *std::max_element(v.begin(), v.end());
}

auto pick_version(const ReplayLog& log, std::optional<std::uint64_t> v) -> std::uint64_t {
    if (!v) return max_version(log);
    if (!log.contains(*v)) raise(ErrorCode::kInvalidSpec, fmt::format("no version {} in the log", *v));
    return *v;
}

auto table_name(const fs::path& p) -> std::string {
    auto stem = p.stem().string();
    return stem.empty() ? std::string("t") : stem;
}

auto payload_column(const std::string& spec) -> PayloadColumn {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() < 2 || parts.size() > 4 || parts[0].empty())
        raise(ErrorCode::kInvalidSpec, fmt::format("payload '{}' is not name:type[:null_fraction[:width]]", spec));
    PayloadColumn c;
    c.name = parts[0];
    c.type = parse_column_type(parts[1]);
    if (parts.size() > 2) c.null_fraction = std::get<double>(parse_cell(parts[2], ColumnType::kFloat64));
    if (parts.size() > 3) c.width = static_cast<std::size_t>(std::get<std::int64_t>(parse_cell(parts[3], ColumnType::kInt64)));
    return c;
}

}  // namespace

auto cmd_generate(const GlobalOptions& g, const GenerateArgs& o) -> int {
    auto spec = edge_spec(o.rows, o.rows_per_key, g.seed);
    spec.key.type = parse_column_type(o.key_type);
    if (o.dist) {
        spec.key.dist = parse_key_dist(*o.dist);
        if (spec.key.dist == KeyDist::kZipf) {
            spec.key.n = static_cast<std::uint64_t>(spec.key.hi - spec.key.lo + 1);
            spec.key.s = o.zipf_s;
            spec.key.lo = 1;
        }
    }
    if (!o.payload.empty()) {
        spec.payload.clear();
        for (const auto& p : o.payload) spec.payload.push_back(payload_column(p));
    }
    const auto t = generate(spec);
    if (g.out.empty()) {
        std::cout << render(g, t);
        return 0;
    }
    write_csv(t, fs::path(g.out));
    std::cerr << fmt::format("wrote {} rows ({}) to {}\n", t.size(), format_schema(t.schema()), g.out);
    return 0;
}

auto cmd_load(const GlobalOptions& g, const LoadArgs& o) -> int {
    const auto t = o.schema.empty() ? read_csv(fs::path(o.table)) : read_csv(fs::path(o.table), read_schema(o.schema));
    std::cerr << fmt::format("{}: {} rows, {} payload bytes, ({})\n", o.table, t.size(), t.byte_size(),
                             format_schema(t.schema()));
    if (!g.out.empty()) {
        write_csv(t, fs::path(g.out));
        return 0;
    }
    if (o.head > 0) {
        PlainTable head(t.schema());
        for (std::size_t i = 0; i < std::min(o.head, t.size()); ++i) head.add_payload_unchecked(t.row(i));
        std::cout << render(g, head);
    }
    return 0;
}

auto cmd_index(const GlobalOptions& g, const IndexArgs& o) -> int {
    const auto t = read_csv(fs::path(o.table));
    const auto col = resolve_column(t.schema(), o.col);
    const auto df = IndexedDataFrame::create_index(t, col, index_options(g));
    State s{table_name(o.table), ReplayLog::for_frame(df, t)};
    save_state(g, s, o.table);
    const auto st = df.stats();
    std::cout << fmt::format(
        "indexed {} rows of {} on '{}' into {} partitions: version {}, index {} bytes over {} data bytes "
        "(ratio {:.4f})\n",
        st.row_count, s.table, t.schema().column(col).name, df.num_partitions(), df.version_no(), st.index_bytes,
        st.data_bytes, st.index_overhead_ratio);
    return 0;
}

auto cmd_lookup(const GlobalOptions& g, const LookupArgs& o) -> int {
    const auto s = load_state(g);
    const auto df = s.log.replay(pick_version(s.log, o.version), effective_threads(g));
    const auto type = df.schema().column(df.index_col()).type;
    emit(g, render(g, df.get_rows(parse_cell(o.key, type))));
    return 0;
}

auto cmd_append(const GlobalOptions& g, const AppendArgs& o) -> int {
    auto s = load_state(g);
    const auto parent = pick_version(s.log, o.version);
    const auto df = s.log.replay(parent, effective_threads(g));
    const auto rows = read_csv(fs::path(o.table));
    if (!rows.schema().same_columns(df.schema()))
        raise(ErrorCode::kSchemaMismatch, fmt::format("{} has ({}), the index holds ({})", o.table,
                                                      format_schema(rows.schema()), format_schema(df.schema())));
    const auto child = df.append_rows_as(rows, max_version(s.log) + 1);
    s.log.record_append(child, rows);
    save_state(g, s, {});
    std::cout << fmt::format("version {} (parent {}): +{} rows, {} rows in total\n", child.version_no(), parent,
                             rows.size(), child.row_count());
    return 0;
}

auto cmd_join(const GlobalOptions& g, const JoinArgs& o) -> int {
    const auto s = load_state(g);
    const auto df = s.log.replay(pick_version(s.log, o.version), effective_threads(g));
    const auto probe = read_csv(fs::path(o.probe));
    const auto probe_col = probe.schema().column(resolve_column(probe.schema(), o.on)).name;
    const auto key_col = df.schema().column(df.index_col()).name;
    const std::string probe_name = s.table == "probe" ? "probe_side" : "probe";

    Catalog cat;
    if (o.no_index) {
        cat.add(s.table, df.scan());
    } else {
        cat.add(s.table, df);
    }
    cat.add(probe_name, probe);
    const auto lp = o.index_left ? equi_join(scan(s.table), scan(probe_name), key_col, probe_col)
                                 : equi_join(scan(probe_name), scan(s.table), probe_col, key_col);
    const auto pp = plan(*lp, cat, planner_options(g, !o.no_index));
    if (o.explain) {
        emit(g, explain(*pp));
        return 0;
    }
    emit(g, render(g, execute(*pp, {effective_threads(g)})));
    return 0;
}

auto cmd_query(const GlobalOptions& g, const QueryArgs& o) -> int {
    const auto text = fs::exists(o.plan) ? read_file(o.plan) : o.plan;
    const auto lp = parse_logical_plan(text);
    Catalog cat;
    if (fs::exists(log_path(g))) {
        const auto s = load_state(g);
        const auto df = s.log.replay(pick_version(s.log, o.version), effective_threads(g));
        if (o.no_index) {
            cat.add(s.table, df.scan());
        } else {
            cat.add(s.table, df);
        }
    }
    for (const auto& spec : o.tables) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0)
            raise(ErrorCode::kInvalidSpec, fmt::format("--table '{}' is not name=path.csv", spec));
        cat.put(spec.substr(0, eq), std::make_shared<const PlainTable>(read_csv(fs::path(spec.substr(eq + 1)))));
    }
    const auto pp = plan(*lp, cat, planner_options(g, !o.no_index));
    if (o.explain) {
        emit(g, explain(*pp));
        return 0;
    }
    emit(g, render(g, execute(*pp, {effective_threads(g)})));
    return 0;
}

auto cmd_bench(const GlobalOptions& g, const BenchArgs& o) -> int {
    bench::BenchConfig cfg;
    cfg.seed = g.seed;
    cfg.partitions = g.partitions;
    cfg.batch_bytes = static_cast<std::uint32_t>(std::min<std::size_t>(g.batch_bytes, UINT32_MAX));
    cfg.broadcast_threshold = g.broadcast_threshold;
    cfg.executors = g.executors;
    cfg.threads = effective_threads(g);
    cfg.build_rows = o.build_rows;
    cfg.probe_rows = o.probe_rows;
    cfg.rows_per_key = o.rows_per_key;
    cfg.reps = o.reps;
    cfg.queries = o.queries;
    cfg.append_every = o.append_every;
    cfg.memory_cap = o.memory_cap;

    std::vector<std::string> suites;
    if (o.suite == "all") {
        suites = bench::suite_names();
    } else {
        suites = {o.suite};
    }
    const bench::Progress progress = [&](std::string_view msg) {
        if (!o.quiet) std::cerr << "ixframe: " << msg << "\n";
    };
    std::string text;
    for (const auto& name : suites) {
        const auto rep = bench::run_suite(name, cfg, progress);
        if (!text.empty()) text += "\n";
        text += g.format == Format::kMd ? bench::to_markdown(rep) : bench::to_csv(rep);
    }
    emit(g, text);
    return 0;
}

auto cmd_report(const GlobalOptions& g, const ReportArgs& o) -> int {
    const bool md = !g.format_given || g.format == Format::kMd;
    std::string text;
    for (const auto& f : o.files) {
        for (const auto& rep : bench::parse_reports(read_file(f))) {
            if (!text.empty()) text += "\n";
            text += md ? bench::to_markdown(rep) : bench::to_csv(rep);
        }
    }
    emit(g, text);
    return 0;
}

}  // namespace ixframe::cli
