#include <ixframe/engine.hpp>

#include <ixframe/error.hpp>

#include <algorithm>

namespace ixframe {

void Catalog::add(std::string name, PlainTable table) {
    add(std::move(name), std::make_shared<const PlainTable>(std::move(table)));
}

void Catalog::add(std::string name, std::shared_ptr<const PlainTable> table) {
    if (!table) raise(ErrorCode::kInvalidPlan, "table '" + name + "' is null");
    if (entries_.contains(name)) raise(ErrorCode::kInvalidPlan, "duplicate table name '" + name + "'");
    entries_.emplace(std::move(name), std::move(table));
}

void Catalog::add(std::string name, IndexedDataFrame df) {
    if (entries_.contains(name)) raise(ErrorCode::kInvalidPlan, "duplicate table name '" + name + "'");
    entries_.emplace(std::move(name), std::move(df));
}

void Catalog::put(std::string name, Entry entry) {
    entries_.insert_or_assign(std::move(name), std::move(entry));
}

auto Catalog::find(std::string_view name) const -> const Entry* {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

auto Catalog::names() const -> std::vector<std::string> {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
}

auto entry_schema(const Catalog::Entry& entry) -> Schema {
    if (const auto* t = std::get_if<std::shared_ptr<const PlainTable>>(&entry)) {
        return (*t)->schema().with_index(std::nullopt);
    }
    return std::get<IndexedDataFrame>(entry).schema().with_index(std::nullopt);
}

auto entry_bytes(const Catalog::Entry& entry) -> std::size_t {
    if (const auto* t = std::get_if<std::shared_ptr<const PlainTable>>(&entry)) return (*t)->byte_size();
    return std::get<IndexedDataFrame>(entry).byte_size();
}

auto entry_rows(const Catalog::Entry& entry) -> std::size_t {
    if (const auto* t = std::get_if<std::shared_ptr<const PlainTable>>(&entry)) return (*t)->size();
    return std::get<IndexedDataFrame>(entry).row_count();
}

auto operator_name(const PhysicalPlan& plan) -> std::string_view {
    using namespace physical;
    return std::visit(
        [](const auto& n) -> std::string_view {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, FullScan>) return "FullScan";
            else if constexpr (std::is_same_v<T, IndexLookup>) return "IndexLookup";
            else if constexpr (std::is_same_v<T, FilterExec>) return "FilterExec";
            else if constexpr (std::is_same_v<T, ProjectExec>) return "ProjectExec";
            else if constexpr (std::is_same_v<T, AggregateExec>) return "AggregateExec";
            else if constexpr (std::is_same_v<T, IndexedEquiJoin>)
                return n.broadcast ? "IndexedBroadcastEquiJoin" : "IndexedShuffledEquiJoin";
            else return n.broadcast ? "BroadcastHashJoin" : "ShuffleHashJoin";
        },
        plan.node);
}

namespace {

class Planner {
public:
    Planner(const Catalog& catalog, const PlannerOptions& options) : catalog_(catalog), options_(options) {}

    auto run(const LogicalPlan& lp) -> PhysicalPtr {
        return std::visit([this](const auto& n) { return visit(n); }, lp.node);
    }

private:
    template <class Node>
    static auto make(Node node, Schema schema, std::size_t bytes) -> PhysicalPtr {
        return std::make_shared<const PhysicalPlan>(PhysicalPlan{std::move(node), std::move(schema), bytes});
    }

    auto entry(const std::string& table) const -> const Catalog::Entry& {
        const auto* e = catalog_.find(table);
        if (e == nullptr) raise(ErrorCode::kUnresolvedColumn, "unknown table '" + table + "'");
        return *e;
    }

    /// The indexed frame behind a bare scan, if any.
    auto indexed_scan(const LogicalPlan& lp) const -> const IndexedDataFrame* {
        if (!options_.use_index) return nullptr;
        const auto* s = std::get_if<logical::Scan>(&lp.node);
        if (s == nullptr) return nullptr;
        return std::get_if<IndexedDataFrame>(&entry(s->table));
    }

    static auto resolve(const Schema& schema, const std::string& column) -> std::size_t {
        auto i = schema.find(column);
        if (!i) raise(ErrorCode::kUnresolvedColumn, "column '" + column + "' not in " + format_schema(schema));
        return *i;
    }

    static auto literal(const Value& v, const Column& col) -> Value {
        if (is_null(v)) raise(ErrorCode::kTypeMismatch, "NULL literal compared with '" + col.name + "'");
        return coerce_value(v, col.type);
    }

    auto visit(const logical::Scan& s) -> PhysicalPtr {
        const auto& e = entry(s.table);
        return make(physical::FullScan{s.table, e}, entry_schema(e), entry_bytes(e));
    }

    auto index_lookup(const std::string& table, const IndexedDataFrame& df, const Value& key) -> PhysicalPtr {
        const auto& col = df.schema().column(df.index_col());
        Value typed = literal(key, col);
        const auto p = df.partition_for(typed);
        // Upper bound: a key's rows share one partition.
        const auto bytes = df.partition(p).data_bytes();
        return make(physical::IndexLookup{table, df, std::move(typed), p}, df.schema().with_index(std::nullopt),
                    bytes);
    }

    auto visit(const logical::Filter& f) -> PhysicalPtr {
        if (const auto* df = indexed_scan(*f.input); df != nullptr && f.predicate.kind == PredicateKind::kEq) {
            const auto col = resolve(df->schema(), f.column);
            if (col == df->index_col()) {
                return index_lookup(std::get<logical::Scan>(f.input->node).table, *df, f.predicate.value);
            }
        }
        auto input = run(*f.input);
        const auto col = resolve(input->schema, f.column);
        const auto& column = input->schema.column(col);
        Predicate pred = f.predicate;
        pred.value = literal(pred.value, column);
        if (pred.kind == PredicateKind::kRange) pred.upper = literal(pred.upper, column);
        auto schema = input->schema;
        const auto bytes = input->estimated_bytes;
        return make(physical::FilterExec{std::move(input), col, std::move(pred)}, std::move(schema), bytes);
    }

    auto visit(const logical::Project& p) -> PhysicalPtr {
        auto input = run(*p.input);
        if (p.columns.empty()) raise(ErrorCode::kInvalidPlan, "projection without columns");
        std::vector<std::size_t> cols;
        std::vector<Column> out;
        for (const auto& name : p.columns) {
            cols.push_back(resolve(input->schema, name));
            out.push_back(input->schema.column(cols.back()));
        }
        const auto bytes = input->estimated_bytes;
        return make(physical::ProjectExec{std::move(input), std::move(cols)}, Schema(std::move(out)), bytes);
    }

    auto visit(const logical::Aggregate& a) -> PhysicalPtr {
        auto input = run(*a.input);
        std::vector<std::size_t> groups;
        std::vector<Column> out;
        for (const auto& name : a.group_by) {
            groups.push_back(resolve(input->schema, name));
            out.push_back(input->schema.column(groups.back()));
        }
        std::optional<std::size_t> col;
        Column result{std::string(agg_name(a.agg)), ColumnType::kInt64, false};
        if (a.agg != AggKind::kCount) {
            col = resolve(input->schema, a.column);
            const auto& c = input->schema.column(*col);
            if (a.agg == AggKind::kSum && c.type == ColumnType::kUtf8) {
                raise(ErrorCode::kTypeMismatch, "sum over utf8 column '" + c.name + "'");
            }
            result.name += "_" + c.name;
            result.type = a.agg == AggKind::kSum && c.type == ColumnType::kInt32 ? ColumnType::kInt64 : c.type;
            result.nullable = true;
        }
        while (std::any_of(out.begin(), out.end(), [&](const Column& c) { return c.name == result.name; })) {
            result.name += "_r";
        }
        out.push_back(result);
        const auto bytes = input->estimated_bytes;
        return make(physical::AggregateExec{std::move(input), std::move(groups), a.agg, col}, Schema(std::move(out)),
                    bytes);
    }

    auto visit(const logical::Lookup& l) -> PhysicalPtr {
        const auto& e = entry(l.table);
        const auto* df = std::get_if<IndexedDataFrame>(&e);
        if (df == nullptr) raise(ErrorCode::kInvalidPlan, "lookup on '" + l.table + "', which has no index");
        if (options_.use_index) return index_lookup(l.table, *df, l.key);
        const auto& name = df->schema().column(df->index_col()).name;
        return visit(logical::Filter{ixframe::scan(l.table), name, Predicate::eq(l.key)});
    }

    auto visit(const logical::EquiJoin& j) -> PhysicalPtr {
        const auto* left_df = indexed_scan(*j.left);
        const auto* right_df = indexed_scan(*j.right);
        const bool left_build = left_df != nullptr && resolve(left_df->schema(), j.left_col) == left_df->index_col();
        const bool right_build =
            !left_build && right_df != nullptr && resolve(right_df->schema(), j.right_col) == right_df->index_col();

        auto left = run(*j.left);
        auto right = run(*j.right);
        const auto lc = resolve(left->schema, j.left_col);
        const auto rc = resolve(right->schema, j.right_col);
        const auto& lt = left->schema.column(lc);
        const auto& rt = right->schema.column(rc);
        if (lt.type != rt.type) {
            raise(ErrorCode::kTypeMismatch, "join of " + lt.name + ":" + std::string(column_type_name(lt.type)) +
                                                " with " + rt.name + ":" + std::string(column_type_name(rt.type)));
        }
        auto schema = Schema::concat(left->schema, right->schema);
        const auto bytes = left->estimated_bytes + right->estimated_bytes;

        if (left_build || right_build) {
            const auto& build_plan = left_build ? *j.left : *j.right;
            const auto& df = left_build ? *left_df : *right_df;
            auto probe = left_build ? right : left;
            const auto probe_col = left_build ? rc : lc;
            const bool broadcast = probe->estimated_bytes < options_.broadcast_threshold;
            physical::IndexedEquiJoin node{broadcast, std::get<logical::Scan>(build_plan.node).table, df, left_build,
                                           std::move(probe), probe_col};
            return make(std::move(node), std::move(schema), bytes);
        }
        const auto partitions = options_.shuffle_partitions == 0 ? default_partition_count()
                                                                 : options_.shuffle_partitions;
        const bool broadcast = options_.baseline_broadcast &&
                               std::min(left->estimated_bytes, right->estimated_bytes) < options_.broadcast_threshold;
        return make(physical::HashJoin{broadcast, std::move(left), std::move(right), lc, rc, partitions},
                    std::move(schema), bytes);
    }

    const Catalog& catalog_;
    const PlannerOptions& options_;
};

}  // namespace

auto plan(const LogicalPlan& lp, const Catalog& catalog, const PlannerOptions& options) -> PhysicalPtr {
    return Planner(catalog, options).run(lp);
}

}  // namespace ixframe
