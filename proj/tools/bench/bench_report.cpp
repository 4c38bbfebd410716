#include "bench_report.hpp"

#include <ixframe/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ixframe::bench {

auto percentile(std::vector<double> sorted, double q) -> double {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

auto summarize(std::vector<double> samples) -> Summary {
    Summary s;
    s.reps = samples.size();
    if (samples.empty()) return s;
    std::sort(samples.begin(), samples.end());
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
    s.median = percentile(samples, 0.5);
    s.p5 = percentile(samples, 0.05);
    s.p95 = percentile(samples, 0.95);
    return s;
}

auto format_number(double v) -> std::string {
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15) return fmt::format("{:.0f}", v);
    return fmt::format("{:.4f}", v);
}

namespace {

auto csv_field(std::string_view s) -> std::string {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

auto split_csv_line(std::string_view line, std::size_t line_no) -> std::vector<std::string> {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    if (quoted) raise(ErrorCode::kParseError, fmt::format("report line {}: unterminated quote", line_no));
    return out;
}

auto parse_double(const std::string& s, std::size_t line_no) -> double {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        raise(ErrorCode::kParseError, fmt::format("report line {}: bad number '{}'", line_no, s));
    return v;
}

auto opt_cell(const std::optional<Summary>& s, double Summary::*field) -> std::string {
    return s ? format_number((*s).*field) : std::string{};
}

}  // namespace

auto to_csv(const BenchReport& report) -> std::string {
    std::string out = fmt::format("# suite {}\n", report.suite);
    for (const auto& [k, v] : report.config) out += fmt::format("# config {}={}\n", k, v);
    if (!report.ratio_label.empty()) out += fmt::format("# ratio {}\n", report.ratio_label);
    for (const auto& n : report.notes) out += fmt::format("# note {}\n", n);
    out += kCsvHeader;
    out += '\n';
    for (const auto& r : report.rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(report.suite),
                           csv_field(r.name), csv_field(r.unit), r.indexed.reps, format_number(r.indexed.median),
                           format_number(r.indexed.p5), format_number(r.indexed.p95),
                           format_number(r.indexed.mean), r.baseline ? std::to_string(r.baseline->reps) : "",
                           opt_cell(r.baseline, &Summary::median),
                           opt_cell(r.baseline, &Summary::p5), opt_cell(r.baseline, &Summary::p95),
                           opt_cell(r.baseline, &Summary::mean), r.ratio ? format_number(*r.ratio) : "n/a",
                           r.result_rows, csv_field(r.check));
    }
    return out;
}

auto to_markdown(const BenchReport& report) -> std::string {
    std::string out = fmt::format("## {}\n\n", report.suite);
    if (!report.config.empty()) {
        std::string cfg;
        for (const auto& [k, v] : report.config) cfg += fmt::format("{}`{}={}`", cfg.empty() ? "" : " ", k, v);
        out += fmt::format("Config: {}\n\n", cfg);
    }
    out += "| case | unit | reps | median | p5 | p95 | mean | baseline reps | baseline median | baseline mean | ratio | rows | check |\n";
    out += "|---|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---|\n";
    for (const auto& r : report.rows) {
        out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", r.name,
                           r.unit, r.indexed.reps, format_number(r.indexed.median), format_number(r.indexed.p5),
                           format_number(r.indexed.p95), format_number(r.indexed.mean),
                           r.baseline ? std::to_string(r.baseline->reps) : "-",
                           r.baseline ? format_number(r.baseline->median) : "-",
                           r.baseline ? format_number(r.baseline->mean) : "-",
                           r.ratio ? format_number(*r.ratio) : "n/a", r.result_rows, r.check);
    }
    if (!report.ratio_label.empty()) out += fmt::format("\nRatio: {}.\n", report.ratio_label);
    if (!report.notes.empty()) {
        out += '\n';
        for (const auto& n : report.notes) out += fmt::format("- {}\n", n);
    }
    return out;
}

auto parse_reports(std::string_view csv) -> std::vector<BenchReport> {
    std::vector<BenchReport> out;
    std::istringstream in{std::string(csv)};
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    auto current = [&]() -> BenchReport& {
        if (out.empty()) raise(ErrorCode::kParseError, fmt::format("report line {}: missing '# suite'", line_no));
        return out.back();
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.starts_with("# suite ")) {
            out.emplace_back().suite = line.substr(8);
            have_header = false;
        } else if (line.starts_with("# config ")) {
            const auto kv = line.substr(9);
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                raise(ErrorCode::kParseError, fmt::format("report line {}: config without '='", line_no));
            current().config.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        } else if (line.starts_with("# ratio ")) {
            current().ratio_label = line.substr(8);
        } else if (line.starts_with("# note ")) {
            current().notes.push_back(line.substr(7));
        } else if (line.starts_with("#")) {
            continue;
        } else if (line == kCsvHeader) {
            current();
            have_header = true;
        } else {
            if (!have_header) raise(ErrorCode::kParseError, fmt::format("report line {}: missing header", line_no));
            const auto f = split_csv_line(line, line_no);
            if (f.size() != 16)
                raise(ErrorCode::kParseError,
                      fmt::format("report line {}: expected 16 fields, got {}", line_no, f.size()));
            BenchRow r;
            r.name = f[1];
            r.unit = f[2];
            r.indexed.reps = static_cast<std::size_t>(parse_double(f[3], line_no));
            r.indexed.median = parse_double(f[4], line_no);
            r.indexed.p5 = parse_double(f[5], line_no);
            r.indexed.p95 = parse_double(f[6], line_no);
            r.indexed.mean = parse_double(f[7], line_no);
            if (!f[8].empty()) {
                r.baseline = Summary{static_cast<std::size_t>(parse_double(f[8], line_no)),
                                     parse_double(f[9], line_no), parse_double(f[10], line_no),
                                     parse_double(f[11], line_no), parse_double(f[12], line_no)};
            }
            if (f[13] != "n/a") r.ratio = parse_double(f[13], line_no);
            r.result_rows = static_cast<std::size_t>(parse_double(f[14], line_no));
            r.check = f[15];
            current().rows.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace ixframe::bench
