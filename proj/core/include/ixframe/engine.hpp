#pragma once

#include <ixframe/dataframe.hpp>
#include <ixframe/logical_plan.hpp>
#include <ixframe/plain_table.hpp>

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ixframe {

/// Named tables a plan can refer to. Names are unique.
class Catalog {
public:
    using Entry = std::variant<std::shared_ptr<const PlainTable>, IndexedDataFrame>;

    void add(std::string name, PlainTable table);
    void add(std::string name, std::shared_ptr<const PlainTable> table);
    void add(std::string name, IndexedDataFrame df);
    /// Replaces an existing entry (e.g. with a newer version).
    void put(std::string name, Entry entry);

    [[nodiscard]] auto find(std::string_view name) const -> const Entry*;
    [[nodiscard]] auto contains(std::string_view name) const -> bool { return find(name) != nullptr; }
    [[nodiscard]] auto names() const -> std::vector<std::string>;

private:
    std::map<std::string, Entry, std::less<>> entries_;
};

/// Schema of an entry as seen by plans (no index column marker).
auto entry_schema(const Catalog::Entry& entry) -> Schema;
auto entry_bytes(const Catalog::Entry& entry) -> std::size_t;
auto entry_rows(const Catalog::Entry& entry) -> std::size_t;

struct PhysicalPlan;
using PhysicalPtr = std::shared_ptr<const PhysicalPlan>;

namespace physical {

struct FullScan {
    std::string table;
    Catalog::Entry source;
};

struct IndexLookup {
    std::string table;
    IndexedDataFrame df;
    Value key;  // already converted to the index column type
    std::size_t partition = 0;
};

struct FilterExec {
    PhysicalPtr input;
    std::size_t column = 0;
    Predicate predicate;  // literals converted to the column type
};

struct ProjectExec {
    PhysicalPtr input;
    std::vector<std::size_t> columns;
};

struct AggregateExec {
    PhysicalPtr input;
    std::vector<std::size_t> group_cols;
    AggKind agg = AggKind::kCount;
    std::optional<std::size_t> column;
};

/// The indexed side is the build side and never moves. Probe rows are
/// shuffled to the partition owning their key, or sent to every partition
/// when `broadcast` is set.
struct IndexedEquiJoin {
    bool broadcast = false;
    std::string build_table;
    IndexedDataFrame build;
    bool build_is_left = true;
    PhysicalPtr probe;
    std::size_t probe_col = 0;
};

/// Baseline hash join. Both sides are shuffled (or the smaller one
/// broadcast) and a hash table is built per partition.
struct HashJoin {
    bool broadcast = false;
    PhysicalPtr left;
    PhysicalPtr right;
    std::size_t left_col = 0;
    std::size_t right_col = 0;
    std::size_t partitions = 1;
};

}  // namespace physical

struct PhysicalPlan {
    std::variant<physical::FullScan, physical::IndexLookup, physical::FilterExec, physical::ProjectExec,
                 physical::AggregateExec, physical::IndexedEquiJoin, physical::HashJoin>
        node;
    Schema schema;                    // output schema
    std::size_t estimated_bytes = 0;  // encoded output bytes, upper bound
};

/// "IndexedShuffledEquiJoin", "ShuffleHashJoin", "FullScan", ...
auto operator_name(const PhysicalPlan& plan) -> std::string_view;

struct PlannerOptions {
    std::size_t broadcast_threshold = 10 * 1024 * 1024;
    /// false plans every query with baseline operators only.
    bool use_index = true;
    /// Partitions for baseline joins; 0 picks default_partition_count().
    std::size_t shuffle_partitions = 0;
    /// Lets the baseline broadcast a plain side smaller than the threshold
    /// instead of shuffling both. Off: plain joins always shuffle.
    bool baseline_broadcast = false;
};

/// Throws UnresolvedColumn, TypeMismatch or InvalidPlan.
auto plan(const LogicalPlan& lp, const Catalog& catalog, const PlannerOptions& options = {}) -> PhysicalPtr;

struct ExecOptions {
    std::size_t threads = 0;  // 0 picks default_thread_count()
};

struct ExecStats {
    std::size_t shuffle_bytes = 0;        // bytes routed between partitions
    std::size_t build_shuffle_bytes = 0;  // build-side bytes moved by indexed joins
    std::size_t shuffle_messages = 0;     // rows routed
    std::size_t partitions_touched = 0;
    /// Bytes received per partition by the last join.
    std::vector<std::size_t> partition_bytes;
};

/// Throws ExecFailure wrapping errors raised inside partitions.
auto execute(const PhysicalPlan& pp, const ExecOptions& options = {}, ExecStats* stats = nullptr) -> PlainTable;

/// Indented operator tree; deterministic for a given plan.
auto explain(const PhysicalPlan& pp) -> std::string;

}  // namespace ixframe
