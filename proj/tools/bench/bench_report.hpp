#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ixframe::bench {

struct Summary {
    std::size_t reps = 0;
    double median = 0.0;
    double p5 = 0.0;
    double p95 = 0.0;
    double mean = 0.0;
};

/// Percentiles by linear interpolation between order statistics.
auto summarize(std::vector<double> samples) -> Summary;
auto percentile(std::vector<double> sorted, double q) -> double;

struct BenchRow {
    std::string name;
    std::string unit = "ms";
    Summary indexed;
    std::optional<Summary> baseline;
    std::optional<double> ratio;  // n/a when empty
    std::size_t result_rows = 0;
    std::string check = "ok";     // outcome of the indexed-vs-baseline comparison
};

struct BenchReport {
    std::string suite;
    std::vector<std::pair<std::string, std::string>> config;
    std::string ratio_label;
    std::vector<BenchRow> rows;
    std::vector<std::string> notes;
};

inline constexpr std::string_view kCsvHeader =
    "suite,case,unit,reps,median,p5,p95,mean,baseline_reps,baseline_median,baseline_p5,baseline_p95,baseline_mean,ratio,rows,check";

auto format_number(double v) -> std::string;

/// Comment lines (`# suite`, `# config`, `# ratio`, `# note`) followed by
/// the header and one line per case.
auto to_csv(const BenchReport& report) -> std::string;
auto to_markdown(const BenchReport& report) -> std::string;

/// Reads back one or more reports written by to_csv. Throws ParseError.
auto parse_reports(std::string_view csv) -> std::vector<BenchReport>;

}  // namespace ixframe::bench
