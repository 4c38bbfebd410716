#pragma once

#include <ixframe/dataframe.hpp>
#include <ixframe/replay_log.hpp>

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ixframe {

struct ClusterOptions {
    std::size_t executors = 4;  // capped by IXFRAME_THREADS when set
    /// Scheduling ticks a task waits for a busy host before running remotely.
    std::size_t locality_wait_ticks = 3;
    std::chrono::microseconds tick{1000};
    /// Tasks an executor may have queued before it counts as busy.
    std::size_t executor_slots = 4;
    // Simulated network, accounted only.
    double message_latency_s = 0.0005;
    double bandwidth_bytes_per_s = 1e9;
    std::uint64_t seed = 42;
    /// Rows per shuffle envelope.
    std::size_t envelope_rows = 256;
};

enum class TaskKind { kLookup, kProbe, kInsert, kScan };

auto task_kind_name(TaskKind kind) -> std::string_view;

/// One unit of work against one partition at one version.
struct Task {
    TaskKind kind = TaskKind::kLookup;
    std::size_t partition = 0;
    std::uint64_t expected_version = 0;
    Value key;                                  // kLookup
    std::shared_ptr<const PlainTable> rows;     // kProbe: probe rows; kInsert: rows to add
    std::size_t probe_col = 0;                  // kProbe
    bool build_is_left = true;                  // kProbe
    std::uint64_t new_version = 0;              // kInsert
};

enum class TaskStatus { kOk, kFailed };

struct TaskResult {
    TaskStatus status = TaskStatus::kOk;
    PlainTable rows;             // lookup/probe/scan output
    std::string error;           // set when failed
    std::size_t executor = 0;    // where it finally ran
    bool local = true;           // ran on a host that already had the partition
    bool rebuilt = false;        // the executor replayed the partition first
    std::size_t stale_retries = 0;
    std::size_t attempts = 0;
};

/// Outcome of comparing a replica's version with a task's expectation.
enum class StaleCheck { kAccept, kStale };

struct Replica {
    std::uint64_t version_no = 0;
    std::shared_ptr<const PartitionSnapshot> snapshot;
};

auto stale_check(const Replica& replica, std::uint64_t expected_version) -> StaleCheck;

struct ShuffleReport {
    std::vector<std::size_t> delivered;  // rows per partition
    std::size_t envelopes = 0;
    std::size_t resent = 0;              // envelopes re-sent after a dead destination
    std::size_t duplicates_dropped = 0;  // envelopes seen twice by a receiver
    bool audit_ok = true;                // every sequence number acked exactly once
};

struct ClusterStats {
    std::size_t tasks = 0;
    std::size_t local_tasks = 0;
    std::size_t remote_tasks = 0;
    std::size_t rebuilds = 0;
    std::size_t stale_tasks = 0;
    std::size_t messages = 0;
    std::size_t message_bytes = 0;
    double simulated_network_s = 0.0;
    std::vector<double> rebuild_seconds;
};

/// Executors are threads in this process; partitions live on them and all
/// messages are immutable values. The calling thread acts as the scheduler.
///
/// Appends are applied to the primary copy of each partition only; any other
/// copy becomes stale and is dropped the first time a task notices.
class Cluster {
public:
    /// Places the partitions of `log`'s version `version` (latest by default)
    /// round-robin over the executors.
    explicit Cluster(ReplayLog log, ClusterOptions options = {}, std::optional<std::uint64_t> version = {});
    ~Cluster();
    Cluster(const Cluster&) = delete;
    auto operator=(const Cluster&) -> Cluster& = delete;

    /// Runs every task; results follow task order. Failures are reported per
    /// task and never stop the cluster.
    auto submit(std::vector<Task> tasks) -> std::vector<TaskResult>;

    /// Runs `task` on `executor` as is: no placement, no rebuild, no retry.
    /// A stale replica yields a failed result whose error starts with
    /// "StaleTask".
    auto submit_on(std::size_t executor, Task task) -> TaskResult;

    /// Marks the executor dead and fails its queued work. Its partitions are
    /// rebuilt on demand. Throws NoSurvivingExecutor when it was the last.
    void kill_executor(std::size_t id);

    /// Kills `id` right after `dispatches` more task or shuffle-envelope
    /// dispatches, so a failure can land in the middle of a query or a
    /// shuffle. Skipped if it would kill the last one.
    void kill_after(std::size_t id, std::size_t dispatches);

    /// Copies partition `pid` at the current version onto `executor`.
    void replicate(std::size_t pid, std::size_t executor);

    /// Logs the rows, shuffles them to their partitions and commits a new
    /// version on every partition's primary copy. Returns the new version.
    auto append(const PlainTable& rows) -> std::uint64_t;

    /// Rows with index key `key` at `version` (current by default).
    auto lookup(const Value& key, std::optional<std::uint64_t> version = {}) -> PlainTable;

    /// Indexed shuffled join of `probe` against the current version.
    auto join(const PlainTable& probe, std::size_t probe_col, bool build_is_left = true) -> PlainTable;

    /// Delivers every row exactly once to router(row)'s partition queue.
    auto shuffle(const PlainTable& rows, const std::function<std::size_t(RowBytes)>& router) -> ShuffleReport;

    [[nodiscard]] auto current_version() const -> std::uint64_t { return current_; }
    [[nodiscard]] auto num_partitions() const -> std::size_t;
    [[nodiscard]] auto num_executors() const -> std::size_t;
    [[nodiscard]] auto alive(std::size_t executor) const -> bool;
    /// Executors the scheduler believes hold a copy of `pid`, with versions.
    [[nodiscard]] auto copies(std::size_t pid) const -> std::vector<std::pair<std::size_t, std::uint64_t>>;
    [[nodiscard]] auto primary(std::size_t pid) const -> std::optional<std::size_t>;
    [[nodiscard]] auto stats() const -> const ClusterStats&;
    [[nodiscard]] auto log() const -> const ReplayLog&;
    [[nodiscard]] auto schema() const -> const Schema&;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint64_t current_ = 0;
};

}  // namespace ixframe
