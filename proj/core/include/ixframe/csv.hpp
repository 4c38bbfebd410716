#pragma once

#include <ixframe/plain_table.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace ixframe {

/// CSV with a header row. An empty unquoted field is NULL; a quoted empty
/// field ("") is the empty string. Fields holding a comma, quote, CR or LF
/// are quoted with doubled quotes.
void write_csv(const PlainTable& table, std::ostream& out);
/// Also writes the schema sidecar next to the file.
void write_csv(const PlainTable& table, const std::filesystem::path& path);

/// Throws ParseError naming the line.
auto read_csv(std::istream& in, const Schema& schema) -> PlainTable;
auto read_csv(const std::filesystem::path& path, const Schema& schema) -> PlainTable;
/// Uses the sidecar written by write_csv.
auto read_csv(const std::filesystem::path& path) -> PlainTable;

/// `<csv path>.schema.json`
auto schema_sidecar_path(const std::filesystem::path& csv) -> std::filesystem::path;
auto schema_to_json(const Schema& schema) -> std::string;
auto schema_from_json(std::string_view text) -> Schema;
auto read_schema(const std::filesystem::path& sidecar) -> Schema;

}  // namespace ixframe
