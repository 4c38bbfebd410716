#include "commands.hpp"

#include <ixframe/error.hpp>

#include <CLI11.hpp>

#include <exception>
#include <functional>
#include <iostream>
#include <map>

namespace {

using namespace ixframe::cli;

auto run(int argc, char** argv) -> int {
    CLI::App app{"Indexed dataframe toolkit: build, query and benchmark hash-indexed tables.", "ixframe"};
    app.set_config("--config", "", "Read key=value settings from a file; flags given on the command line win");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    std::string format = "csv";
    const auto sizes = CLI::AsSizeValue(false);
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--partitions", g.partitions, "Hash partitions (0: two per hardware thread)")
        ->capture_default_str();
    app.add_option("--batch-bytes", g.batch_bytes, "Row batch capacity, e.g. 4MB")
        ->transform(sizes)
        ->capture_default_str();
    app.add_option("--broadcast-threshold", g.broadcast_threshold, "Largest probe side broadcast instead of shuffled")
        ->transform(sizes)
        ->capture_default_str();
    app.add_option("--executors", g.executors, "Simulated executors (capped by IXFRAME_THREADS)")
        ->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (0: hardware threads, capped by IXFRAME_THREADS)")
        ->capture_default_str();
    app.add_option("--out", g.out, "Write results to this file instead of stdout");
    app.add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "md"}))
        ->capture_default_str();
    app.add_option("--state", g.state, "Directory holding the indexed table between commands")
        ->capture_default_str();

    std::map<CLI::App*, std::function<int()>> actions;

    GenerateArgs gen;
    auto* c_gen = app.add_subcommand("generate", "Generate a synthetic table (default: edge table, 20 rows per key)");
    c_gen->add_option("--rows", gen.rows, "Row count")->capture_default_str();
    c_gen->add_option("--rows-per-key", gen.rows_per_key, "Average rows per key")->capture_default_str();
    c_gen->add_option("--dist", gen.dist, "Key distribution")
        ->check(CLI::IsMember({"uniform", "zipf", "sequential"}));
    c_gen->add_option("--zipf-s", gen.zipf_s, "Zipf exponent")->capture_default_str();
    c_gen->add_option("--key-type", gen.key_type, "Key column type")
        ->check(CLI::IsMember({"int32", "int64", "float64", "utf8"}))
        ->capture_default_str();
    c_gen->add_option("--payload", gen.payload, "Payload column name:type[:null_fraction[:width]], repeatable");
    actions[c_gen] = [&] { return cmd_generate(g, gen); };

    LoadArgs load;
    auto* c_load = app.add_subcommand("load", "Read a CSV table and print a summary (and its first rows)");
    c_load->add_option("--table", load.table, "CSV file")->required();
    c_load->add_option("--schema", load.schema, "Schema JSON (default: the file's .schema.json sidecar)");
    c_load->add_option("--head", load.head, "Print the first N rows")->capture_default_str();
    actions[c_load] = [&] { return cmd_load(g, load); };

    IndexArgs idx;
    auto* c_idx = app.add_subcommand("index", "Index a CSV table on one column into the state directory");
    c_idx->add_option("--table", idx.table, "CSV file")->required();
    c_idx->add_option("--col", idx.col, "Index column, by name or ordinal")->capture_default_str();
    actions[c_idx] = [&] { return cmd_index(g, idx); };

    LookupArgs look;
    auto* c_look = app.add_subcommand("lookup", "Print the rows with one key, newest first");
    c_look->add_option("--key", look.key, "Key value")->required();
    c_look->add_option("--version", look.version, "Version to read (default: newest)");
    actions[c_look] = [&] { return cmd_lookup(g, look); };

    AppendArgs app_args;
    auto* c_app = app.add_subcommand("append", "Append CSV rows, creating a new version");
    c_app->add_option("--table", app_args.table, "CSV file with the same columns")->required();
    c_app->add_option("--version", app_args.version, "Parent version (default: newest)");
    actions[c_app] = [&] { return cmd_append(g, app_args); };

    JoinArgs join;
    auto* c_join = app.add_subcommand("join", "Equi-join a CSV probe table with the indexed table");
    c_join->add_option("--probe", join.probe, "CSV file")->required();
    c_join->add_option("--on", join.on, "Probe join column, by name or ordinal")->capture_default_str();
    c_join->add_option("--version", join.version, "Version to join with (default: newest)");
    c_join->add_flag("--index-left", join.index_left, "Put the indexed table on the left of the output");
    c_join->add_flag("--explain", join.explain, "Print the physical plan instead of running it");
    c_join->add_flag("--no-index", join.no_index, "Plan with baseline operators only");
    actions[c_join] = [&] { return cmd_join(g, join); };

    QueryArgs query;
    auto* c_query = app.add_subcommand("query", "Run a JSON logical plan (see docs/plan.md)");
    c_query->add_option("--plan", query.plan, "Plan file or inline JSON")->required();
    c_query->add_option("--table", query.tables, "Extra plain table name=path.csv, repeatable");
    c_query->add_option("--version", query.version, "Version of the indexed table (default: newest)");
    c_query->add_flag("--explain", query.explain, "Print the physical plan instead of running it");
    c_query->add_flag("--no-index", query.no_index, "Plan with baseline operators only");
    actions[c_query] = [&] { return cmd_query(g, query); };

    BenchArgs bench;
    std::vector<std::string> suite_choices = ixframe::bench::suite_names();
    suite_choices.emplace_back("all");
    auto* c_bench = app.add_subcommand("bench", "Run a benchmark suite, indexed against baseline");
    c_bench->add_option("suite", bench.suite, "Suite name or 'all'")->required()->check(CLI::IsMember(suite_choices));
    c_bench->add_option("--build-rows", bench.build_rows, "Rows in the indexed table")->capture_default_str();
    c_bench->add_option("--probe-rows", bench.probe_rows, "join-scale probe sizes (default: 1e-4..1e-1 of build)")
        ->delimiter(',');
    c_bench->add_option("--rows-per-key", bench.rows_per_key, "Average rows per key")->capture_default_str();
    c_bench->add_option("--reps", bench.reps, "Repetitions per timed case (at least 10)")->capture_default_str();
    c_bench->add_option("--queries", bench.queries, "Query sequence length")->capture_default_str();
    c_bench->add_option("--append-every", bench.append_every, "Joins between appends (read latency suite)")
        ->capture_default_str();
    c_bench->add_option("--memory-cap", bench.memory_cap, "Abort suites projected above this (0: 80% of RAM)")
        ->transform(sizes)
        ->capture_default_str();
    c_bench->add_flag("--quiet", bench.quiet, "No progress messages");
    actions[c_bench] = [&] { return cmd_bench(g, bench); };

    ReportArgs report;
    auto* c_report = app.add_subcommand("report", "Render saved CSV bench reports (Markdown unless --format csv)");
    c_report->add_option("files", report.files, "Report CSV files")->required()->check(CLI::ExistingFile);
    actions[c_report] = [&] { return cmd_report(g, report); };

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "ixframe: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    g.format = format == "md" ? Format::kMd : Format::kCsv;
    g.format_given = app.get_option("--format")->count() > 0;
    for (const auto& [sub, action] : actions) {
        if (sub->parsed()) return action();
    }
    return 2;
}

}  // namespace

auto main(int argc, char** argv) -> int {
    try {
        return run(argc, argv);
    } catch (const ixframe::Error& e) {
        std::cerr << "ixframe: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "ixframe: error: " << e.what() << "\n";
    } catch (...) {
        std::cerr << "ixframe: error: unknown failure\n";
    }
    return 1;
}
