#pragma once

#include <ixframe/types.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ixframe {

enum class PredicateKind { kEq, kLt, kGt, kRange };

/// Comparison against literals. kRange is inclusive on both ends. NULL cells
/// never match. Floats compare in IEEE total order, strings bytewise.
struct Predicate {
    PredicateKind kind = PredicateKind::kEq;
    Value value;
    Value upper;  // kRange only

    static auto eq(Value v) -> Predicate { return {PredicateKind::kEq, std::move(v), {}}; }
    static auto lt(Value v) -> Predicate { return {PredicateKind::kLt, std::move(v), {}}; }
    static auto gt(Value v) -> Predicate { return {PredicateKind::kGt, std::move(v), {}}; }
    static auto range(Value lo, Value hi) -> Predicate { return {PredicateKind::kRange, std::move(lo), std::move(hi)}; }
};

auto predicate_name(PredicateKind kind) -> std::string_view;
auto parse_predicate_kind(std::string_view name) -> PredicateKind;

enum class AggKind { kCount, kSum, kMin, kMax };

auto agg_name(AggKind kind) -> std::string_view;
auto parse_agg_kind(std::string_view name) -> AggKind;

struct LogicalPlan;
using LogicalPtr = std::shared_ptr<const LogicalPlan>;

namespace logical {

struct Scan {
    std::string table;
};

struct Filter {
    LogicalPtr input;
    std::string column;
    Predicate predicate;
};

struct Project {
    LogicalPtr input;
    std::vector<std::string> columns;
};

struct EquiJoin {
    LogicalPtr left;
    LogicalPtr right;
    std::string left_col;
    std::string right_col;
};

/// COUNT(*) ignores `column`; the others skip NULL cells.
struct Aggregate {
    LogicalPtr input;
    std::vector<std::string> group_by;
    AggKind agg = AggKind::kCount;
    std::string column;
};

struct Lookup {
    std::string table;
    Value key;
};

}  // namespace logical

struct LogicalPlan {
    std::variant<logical::Scan, logical::Filter, logical::Project, logical::EquiJoin, logical::Aggregate,
                 logical::Lookup>
        node;
};

auto scan(std::string table) -> LogicalPtr;
auto filter(LogicalPtr input, std::string column, Predicate predicate) -> LogicalPtr;
auto project(LogicalPtr input, std::vector<std::string> columns) -> LogicalPtr;
auto equi_join(LogicalPtr left, LogicalPtr right, std::string left_col, std::string right_col) -> LogicalPtr;
auto aggregate(LogicalPtr input, std::vector<std::string> group_by, AggKind agg, std::string column = {})
    -> LogicalPtr;
auto lookup(std::string table, Value key) -> LogicalPtr;

/// JSON form of logical plans; see docs/plan.md. Throws InvalidPlan.
auto parse_logical_plan(std::string_view json) -> LogicalPtr;
auto logical_plan_to_json(const LogicalPlan& plan) -> std::string;

}  // namespace ixframe
