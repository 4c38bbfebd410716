#include <ixframe/engine.hpp>

#include <sstream>

namespace ixframe {

namespace {

auto column_name(const PhysicalPlan& p, std::size_t col) -> const std::string& { return p.schema.column(col).name; }

auto join_names(const std::vector<std::string>& names) -> std::string {
    std::string out = "[";
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i > 0) out += ", ";
        out += names[i];
    }
    return out + "]";
}

auto literal(const Value& v) -> std::string {
    if (const auto* s = std::get_if<std::string>(&v)) return "'" + *s + "'";
    return format_value(v);
}

void render(const PhysicalPlan& p, int depth, const std::string& label, std::ostringstream& out) {
    using namespace physical;
    out << std::string(static_cast<std::size_t>(depth) * 2, ' ') << label << operator_name(p);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, FullScan>) {
                out << " table=" << n.table;
                if (const auto* df = std::get_if<IndexedDataFrame>(&n.source)) {
                    out << " indexed version=" << df->version_no() << " partitions=" << df->num_partitions();
                } else {
                    out << " plain";
                }
                out << " rows=" << entry_rows(n.source) << "\n";
            } else if constexpr (std::is_same_v<T, IndexLookup>) {
                out << " table=" << n.table << " column=" << n.df.schema().column(n.df.index_col()).name
                    << " key=" << literal(n.key) << " partition=" << n.partition
                    << " version=" << n.df.version_no() << "\n";
            } else if constexpr (std::is_same_v<T, FilterExec>) {
                out << " " << column_name(*n.input, n.column) << " " << predicate_name(n.predicate.kind) << " "
                    << literal(n.predicate.value);
                if (n.predicate.kind == PredicateKind::kRange) out << " .. " << literal(n.predicate.upper);
                out << "\n";
                render(*n.input, depth + 1, "", out);
            } else if constexpr (std::is_same_v<T, ProjectExec>) {
                std::vector<std::string> names;
                for (auto c : n.columns) names.push_back(column_name(*n.input, c));
                out << " " << join_names(names) << "\n";
                render(*n.input, depth + 1, "", out);
            } else if constexpr (std::is_same_v<T, AggregateExec>) {
                std::vector<std::string> names;
                for (auto c : n.group_cols) names.push_back(column_name(*n.input, c));
                out << " group=" << join_names(names) << " agg=" << agg_name(n.agg) << "("
                    << (n.column ? column_name(*n.input, *n.column) : "*") << ")\n";
                render(*n.input, depth + 1, "", out);
            } else if constexpr (std::is_same_v<T, IndexedEquiJoin>) {
                const auto& key = n.build.schema().column(n.build.index_col()).name;
                out << " build=" << (n.build_is_left ? "left" : "right") << " on " << n.build_table << "." << key
                    << " = " << column_name(*n.probe, n.probe_col) << " partitions=" << n.build.num_partitions()
                    << " probe_bytes=" << n.probe->estimated_bytes << "\n";
                out << std::string(static_cast<std::size_t>(depth + 1) * 2, ' ') << "build: IndexedTable table="
                    << n.build_table << " version=" << n.build.version_no() << " rows=" << n.build.row_count()
                    << "\n";
                render(*n.probe, depth + 1, "probe: ", out);
            } else {
                out << " on " << column_name(*n.left, n.left_col) << " = " << column_name(*n.right, n.right_col)
                    << " partitions=" << n.partitions << "\n";
                render(*n.left, depth + 1, "left: ", out);
                render(*n.right, depth + 1, "right: ", out);
            }
        },
        p.node);
}

}  // namespace

auto explain(const PhysicalPlan& pp) -> std::string {
    std::ostringstream out;
    render(pp, 0, "", out);
    return out.str();
}

}  // namespace ixframe
