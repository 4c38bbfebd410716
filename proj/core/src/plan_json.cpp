#include <ixframe/error.hpp>
#include <ixframe/logical_plan.hpp>

#include <json.hpp>

namespace ixframe {

namespace {

using nlohmann::json;

auto value_from_json(const json& j) -> Value {
    if (j.is_null()) return std::monostate{};
    if (j.is_boolean()) raise(ErrorCode::kInvalidPlan, "boolean literals are not supported");
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    raise(ErrorCode::kInvalidPlan, "literal must be a number, string or null");
}

auto value_to_json(const Value& v) -> json {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else return x;
        },
        v);
}

auto field(const json& j, const char* name) -> const json& {
    auto it = j.find(name);
    if (it == j.end()) raise(ErrorCode::kInvalidPlan, std::string("missing field '") + name + "'");
    return *it;
}

auto text(const json& j, const char* name) -> std::string {
    const auto& f = field(j, name);
    if (!f.is_string()) raise(ErrorCode::kInvalidPlan, std::string("field '") + name + "' must be a string");
    return f.get<std::string>();
}

auto names(const json& j, const char* name) -> std::vector<std::string> {
    auto it = j.find(name);
    if (it == j.end()) return {};
    if (!it->is_array()) raise(ErrorCode::kInvalidPlan, std::string("field '") + name + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : *it) {
        if (!e.is_string()) raise(ErrorCode::kInvalidPlan, std::string("field '") + name + "' holds a non-string");
        out.push_back(e.get<std::string>());
    }
    return out;
}

auto from_json(const json& j) -> LogicalPtr {
    if (!j.is_object()) raise(ErrorCode::kInvalidPlan, "plan node must be an object");
    const auto op = text(j, "op");
    if (op == "scan") return scan(text(j, "table"));
    if (op == "lookup") return lookup(text(j, "table"), value_from_json(field(j, "key")));
    if (op == "filter") {
        Predicate p;
        p.kind = parse_predicate_kind(text(j, "predicate"));
        if (p.kind == PredicateKind::kRange) {
            p.value = value_from_json(field(j, "lo"));
            p.upper = value_from_json(field(j, "hi"));
        } else {
            p.value = value_from_json(field(j, "value"));
        }
        return filter(from_json(field(j, "input")), text(j, "column"), std::move(p));
    }
    if (op == "project") return project(from_json(field(j, "input")), names(j, "columns"));
    if (op == "join") {
        return equi_join(from_json(field(j, "left")), from_json(field(j, "right")), text(j, "left_col"),
                         text(j, "right_col"));
    }
    if (op == "aggregate") {
        const auto agg = parse_agg_kind(text(j, "agg"));
        std::string column = agg == AggKind::kCount ? std::string() : text(j, "column");
        return aggregate(from_json(field(j, "input")), names(j, "group_by"), agg, std::move(column));
    }
    raise(ErrorCode::kInvalidPlan, "unknown op '" + op + "'");
}

auto to_json(const LogicalPlan& plan) -> json {
    return std::visit(
        [](const auto& n) -> json {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, logical::Scan>) {
                return {{"op", "scan"}, {"table", n.table}};
            } else if constexpr (std::is_same_v<T, logical::Lookup>) {
                return {{"op", "lookup"}, {"table", n.table}, {"key", value_to_json(n.key)}};
            } else if constexpr (std::is_same_v<T, logical::Filter>) {
                json j{{"op", "filter"},
                       {"input", to_json(*n.input)},
                       {"column", n.column},
                       {"predicate", predicate_name(n.predicate.kind)}};
                if (n.predicate.kind == PredicateKind::kRange) {
                    j["lo"] = value_to_json(n.predicate.value);
                    j["hi"] = value_to_json(n.predicate.upper);
                } else {
                    j["value"] = value_to_json(n.predicate.value);
                }
                return j;
            } else if constexpr (std::is_same_v<T, logical::Project>) {
                return {{"op", "project"}, {"input", to_json(*n.input)}, {"columns", n.columns}};
            } else if constexpr (std::is_same_v<T, logical::EquiJoin>) {
                return {{"op", "join"},
                        {"left", to_json(*n.left)},
                        {"right", to_json(*n.right)},
                        {"left_col", n.left_col},
                        {"right_col", n.right_col}};
            } else {
                json j{{"op", "aggregate"},
                       {"input", to_json(*n.input)},
                       {"group_by", n.group_by},
                       {"agg", agg_name(n.agg)}};
                if (n.agg != AggKind::kCount) j["column"] = n.column;
                return j;
            }
        },
        plan.node);
}

}  // namespace

auto parse_logical_plan(std::string_view text) -> LogicalPtr {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        raise(ErrorCode::kInvalidPlan, std::string("plan is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

auto logical_plan_to_json(const LogicalPlan& plan) -> std::string { return to_json(plan).dump(2); }

}  // namespace ixframe
