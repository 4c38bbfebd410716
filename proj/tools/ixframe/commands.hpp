#pragma once

#include "suites.hpp"

#include <ixframe/row_batch.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ixframe::cli {

enum class Format { kCsv, kMd };

struct GlobalOptions {
    std::uint64_t seed = 42;
    std::size_t partitions = 0;
    std::size_t batch_bytes = kDefaultBatchBytes;
    std::size_t broadcast_threshold = 10 * 1024 * 1024;
    std::size_t executors = 4;
    std::size_t threads = 0;
    std::string out;  // empty: stdout
    Format format = Format::kCsv;
    bool format_given = false;
    std::string state = ".ixframe";
};

struct GenerateArgs {
    std::size_t rows = 100000;
    double rows_per_key = 20.0;
    std::optional<std::string> dist;
    double zipf_s = 1.0;
    std::string key_type = "int64";
    std::vector<std::string> payload;  // name:type[:null_fraction[:width]]
};

struct LoadArgs {
    std::string table;
    std::string schema;  // sidecar path; empty uses <table>.schema.json
    std::size_t head = 0;
};

struct IndexArgs {
    std::string table;
    std::string col = "0";
};

struct LookupArgs {
    std::string key;
    std::optional<std::uint64_t> version;
};

struct AppendArgs {
    std::string table;
    std::optional<std::uint64_t> version;
};

struct JoinArgs {
    std::string probe;
    std::string on = "0";
    std::optional<std::uint64_t> version;
    bool index_left = false;
    bool explain = false;
    bool no_index = false;
};

struct QueryArgs {
    std::string plan;  // file path or inline JSON
    std::vector<std::string> tables;  // name=path.csv
    std::optional<std::uint64_t> version;
    bool explain = false;
    bool no_index = false;
};

struct BenchArgs {
    std::string suite;
    std::size_t build_rows = 10'000'000;
    std::vector<std::size_t> probe_rows;
    double rows_per_key = 20.0;
    std::size_t reps = 10;
    std::size_t queries = 200;
    std::size_t append_every = 5;
    std::size_t memory_cap = 0;
    bool quiet = false;
};

struct ReportArgs {
    std::vector<std::string> files;
};

// Each returns the process exit code and raises ixframe::Error on failure.
auto cmd_generate(const GlobalOptions& g, const GenerateArgs& o) -> int;
auto cmd_load(const GlobalOptions& g, const LoadArgs& o) -> int;
auto cmd_index(const GlobalOptions& g, const IndexArgs& o) -> int;
auto cmd_lookup(const GlobalOptions& g, const LookupArgs& o) -> int;
auto cmd_append(const GlobalOptions& g, const AppendArgs& o) -> int;
auto cmd_join(const GlobalOptions& g, const JoinArgs& o) -> int;
auto cmd_query(const GlobalOptions& g, const QueryArgs& o) -> int;
auto cmd_bench(const GlobalOptions& g, const BenchArgs& o) -> int;
auto cmd_report(const GlobalOptions& g, const ReportArgs& o) -> int;

}  // namespace ixframe::cli
