#include <ixframe/logical_plan.hpp>

#include <ixframe/error.hpp>

namespace ixframe {

auto predicate_name(PredicateKind kind) -> std::string_view {
    switch (kind) {
        case PredicateKind::kEq: return "eq";
        case PredicateKind::kLt: return "lt";
        case PredicateKind::kGt: return "gt";
        case PredicateKind::kRange: return "range";
    }
    return "?";
}

auto parse_predicate_kind(std::string_view name) -> PredicateKind {
    if (name == "eq") return PredicateKind::kEq;
    if (name == "lt") return PredicateKind::kLt;
    if (name == "gt") return PredicateKind::kGt;
    if (name == "range") return PredicateKind::kRange;
    raise(ErrorCode::kInvalidPlan, "unknown predicate '" + std::string(name) + "'");
}

auto agg_name(AggKind kind) -> std::string_view {
    switch (kind) {
        case AggKind::kCount: return "count";
        case AggKind::kSum: return "sum";
        case AggKind::kMin: return "min";
        case AggKind::kMax: return "max";
    }
    return "?";
}

auto parse_agg_kind(std::string_view name) -> AggKind {
    if (name == "count") return AggKind::kCount;
    if (name == "sum") return AggKind::kSum;
    if (name == "min") return AggKind::kMin;
    if (name == "max") return AggKind::kMax;
    raise(ErrorCode::kInvalidPlan, "unknown aggregate '" + std::string(name) + "'");
}

namespace {

template <class Node>
auto make(Node node) -> LogicalPtr {
    return std::make_shared<const LogicalPlan>(LogicalPlan{std::move(node)});
}

void require(const LogicalPtr& p, const char* what) {
    if (!p) raise(ErrorCode::kInvalidPlan, std::string(what) + " input is missing");
}

}  // namespace

auto scan(std::string table) -> LogicalPtr {
    return make(logical::Scan{std::move(table)});
}

auto filter(LogicalPtr input, std::string column, Predicate predicate) -> LogicalPtr {
    require(input, "filter");
    return make(logical::Filter{std::move(input), std::move(column), std::move(predicate)});
}

auto project(LogicalPtr input, std::vector<std::string> columns) -> LogicalPtr {
    require(input, "project");
    return make(logical::Project{std::move(input), std::move(columns)});
}

auto equi_join(LogicalPtr left, LogicalPtr right, std::string left_col, std::string right_col) -> LogicalPtr {
    require(left, "join");
    require(right, "join");
    return make(logical::EquiJoin{std::move(left), std::move(right), std::move(left_col), std::move(right_col)});
}

auto aggregate(LogicalPtr input, std::vector<std::string> group_by, AggKind agg, std::string column) -> LogicalPtr {
    require(input, "aggregate");
    return make(logical::Aggregate{std::move(input), std::move(group_by), agg, std::move(column)});
}

auto lookup(std::string table, Value key) -> LogicalPtr {
    return make(logical::Lookup{std::move(table), std::move(key)});
}

}  // namespace ixframe
