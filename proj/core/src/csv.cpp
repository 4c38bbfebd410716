#include <ixframe/csv.hpp>

#include <ixframe/error.hpp>

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace ixframe {

namespace {

void put_field(std::ostream& out, std::string_view s) {
    const bool quote = s.empty() || s.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!quote) {
        out << s;
        return;
    }
    out << '"';
    for (char c : s) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

struct Field {
    std::string text;
    bool quoted = false;
};

/// RFC-4180 record reader that tracks physical line numbers.
class Lexer {
public:
    explicit Lexer(std::istream& in) : in_(in) {}

    /// False at end of input. `line` is where the record starts.
    auto next(std::vector<Field>& fields, std::size_t& line) -> bool {
        fields.clear();
        int c = in_.get();
        if (c == EOF) return false;
        line = line_;
        Field f;
        bool in_quotes = false;
        bool after_quote = false;
        for (;; c = in_.get()) {
            if (in_quotes) {
                if (c == EOF) fail(line, "unterminated quoted field");
                if (c == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        f.text.push_back('"');
                    } else {
                        in_quotes = false;
                        after_quote = true;
                    }
                    continue;
                }
                if (c == '\n') ++line_;
                f.text.push_back(static_cast<char>(c));
                continue;
            }
            if (c == ',' ) {
                fields.push_back(std::move(f));
                f = {};
                after_quote = false;
                continue;
            }
            if (c == '\r' && in_.peek() == '\n') continue;
            if (c == '\n' || c == EOF) {
                ++line_;
                fields.push_back(std::move(f));
                return true;
            }
            if (after_quote) fail(line_, "text after closing quote");
            if (c == '"') {
                if (!f.text.empty()) fail(line_, "quote inside unquoted field");
                in_quotes = true;
                f.quoted = true;
                continue;
            }
            f.text.push_back(static_cast<char>(c));
        }
    }

    [[noreturn]] static void fail(std::size_t line, const std::string& what) {
        raise(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
    }

private:
    std::istream& in_;
    std::size_t line_ = 1;
};

template <class T>
auto parse_number(const std::string& s, std::size_t line, const Column& col) -> T {
    T v{};
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) {
        Lexer::fail(line, "bad " + std::string(column_type_name(col.type)) + " '" + s + "' in column '" + col.name + "'");
    }
    return v;
}

auto parse_cell(const Field& f, const Column& col, std::size_t line) -> Value {
    if (!f.quoted && f.text.empty()) {
        if (!col.nullable) Lexer::fail(line, "NULL in non-nullable column '" + col.name + "'");
        return std::monostate{};
    }
    switch (col.type) {
        case ColumnType::kInt32: return parse_number<std::int32_t>(f.text, line, col);
        case ColumnType::kInt64: return parse_number<std::int64_t>(f.text, line, col);
        case ColumnType::kFloat64: return parse_number<double>(f.text, line, col);
        case ColumnType::kUtf8: return f.text;
    }
    return std::monostate{};
}

}  // namespace

void write_csv(const PlainTable& table, std::ostream& out) {
    const auto& schema = table.schema();
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (c > 0) out << ',';
        put_field(out, schema.column(c).name);
    }
    out << '\n';
    const auto& codec = table.codec();
    char buf[64];
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto row = table.row(i);
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (c > 0) out << ',';
            if (codec.is_null(row, c)) continue;
            switch (schema.column(c).type) {
                case ColumnType::kInt32:
                case ColumnType::kInt64: {
                    auto r = std::to_chars(buf, buf + sizeof buf, codec.int_cell(row, c));
                    out.write(buf, r.ptr - buf);
                    break;
                }
                case ColumnType::kFloat64: {
                    auto r = std::to_chars(buf, buf + sizeof buf, codec.float_cell(row, c));
                    out.write(buf, r.ptr - buf);
                    break;
                }
                case ColumnType::kUtf8:
                    put_field(out, codec.string_cell(row, c));
                    break;
            }
        }
        out << '\n';
    }
}

void write_csv(const PlainTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorCode::kIoError, "cannot write " + path.string());
    write_csv(table, out);
    if (!out) raise(ErrorCode::kIoError, "write failed for " + path.string());
    std::ofstream side(schema_sidecar_path(path), std::ios::trunc);
    if (!side) raise(ErrorCode::kIoError, "cannot write " + schema_sidecar_path(path).string());
    side << schema_to_json(table.schema()) << '\n';
}

auto read_csv(std::istream& in, const Schema& schema) -> PlainTable {
    Lexer lex(in);
    std::vector<Field> fields;
    std::size_t line = 1;
    if (!lex.next(fields, line)) Lexer::fail(1, "missing header row");
    if (fields.size() != schema.size()) {
        Lexer::fail(line, "header has " + std::to_string(fields.size()) + " columns, schema has " +
                              std::to_string(schema.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c].text != schema.column(c).name) {
            Lexer::fail(line, "header column '" + fields[c].text + "' does not match '" + schema.column(c).name + "'");
        }
    }
    PlainTable out(schema);
    Row row(schema.size());
    while (lex.next(fields, line)) {
        if (fields.size() == 1 && !fields[0].quoted && fields[0].text.empty() && schema.size() > 1) {
            Lexer::fail(line, "empty line");
        }
        if (fields.size() != schema.size()) {
            Lexer::fail(line, "expected " + std::to_string(schema.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) row[c] = parse_cell(fields[c], schema.column(c), line);
        try {
            out.add_row(row);
        } catch (const Error& e) {
            Lexer::fail(line, e.what());
        }
    }
    return out;
}

auto read_csv(const std::filesystem::path& path, const Schema& schema) -> PlainTable {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::kIoError, "cannot read " + path.string());
    return read_csv(in, schema);
}

auto read_csv(const std::filesystem::path& path) -> PlainTable {
    return read_csv(path, read_schema(schema_sidecar_path(path)));
}

auto schema_sidecar_path(const std::filesystem::path& csv) -> std::filesystem::path {
    return std::filesystem::path(csv.string() + ".schema.json");
}

auto schema_to_json(const Schema& schema) -> std::string {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : schema.columns()) {
        cols.push_back({{"name", c.name}, {"type", column_type_name(c.type)}, {"nullable", c.nullable}});
    }
    nlohmann::json j{{"columns", cols}};
    if (schema.index_col()) j["index_col"] = *schema.index_col();
    return j.dump(2);
}

auto schema_from_json(std::string_view text) -> Schema {
    try {
        const auto j = nlohmann::json::parse(text);
        std::vector<Column> cols;
        for (const auto& c : j.at("columns")) {
            cols.push_back({c.at("name").get<std::string>(), parse_column_type(c.at("type").get<std::string>()),
                            c.value("nullable", false)});
        }
        std::optional<std::size_t> index;
        if (j.contains("index_col")) index = j.at("index_col").get<std::size_t>();
        return Schema(std::move(cols), index);
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::kParseError, std::string("schema sidecar: ") + e.what());
    } catch (const Error& e) {
        raise(ErrorCode::kParseError, std::string("schema sidecar: ") + e.what());
    }
}

auto read_schema(const std::filesystem::path& sidecar) -> Schema {
    std::ifstream in(sidecar);
    if (!in) raise(ErrorCode::kIoError, "cannot read schema " + sidecar.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return schema_from_json(ss.str());
}

}  // namespace ixframe
