#include <ixframe/cluster.hpp>

#include <ixframe/canonical_key.hpp>
#include <ixframe/error.hpp>
#include <ixframe/parallel.hpp>

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <thread>

namespace ixframe {

auto task_kind_name(TaskKind kind) -> std::string_view {
    switch (kind) {
        case TaskKind::kLookup: return "lookup";
        case TaskKind::kProbe: return "probe";
        case TaskKind::kInsert: return "insert";
        case TaskKind::kScan: return "scan";
    }
    return "?";
}

auto stale_check(const Replica& replica, std::uint64_t expected_version) -> StaleCheck {
    return replica.snapshot != nullptr && replica.version_no == expected_version ? StaleCheck::kAccept
                                                                                 : StaleCheck::kStale;
}

namespace {

struct Message {
    enum Kind { kRun, kDeliver, kInstall, kStop } kind = kRun;
    std::size_t ticket = 0;
    Task task;
    bool rebuild = false;
    std::uint64_t rebuild_version = 0;
    std::shared_ptr<const ReplayLog> log;
    std::shared_ptr<const PlainTable> envelope;
    std::uint64_t shuffle_id = 0;
    std::uint64_t seq = 0;
    Replica replica;
};

struct Completion {
    enum Kind { kDone, kStale, kError, kLost, kAck } kind = kDone;
    std::size_t ticket = 0;
    std::size_t executor = 0;
    PlainTable rows;
    std::string error;
    bool rebuilt = false;
    double rebuild_s = 0.0;
    bool duplicate = false;
};

class CompletionQueue {
public:
    void push(Completion c) {
        {
            std::lock_guard lock(mu_);
            items_.push_back(std::move(c));
        }
        cv_.notify_one();
    }

    /// Waits up to `timeout`; returns everything queued.
    auto drain(std::chrono::microseconds timeout) -> std::vector<Completion> {
        std::unique_lock lock(mu_);
        cv_.wait_for(lock, timeout, [&] { return !items_.empty(); });
        std::vector<Completion> out(std::make_move_iterator(items_.begin()), std::make_move_iterator(items_.end()));
        items_.clear();
        return out;
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Completion> items_;
};

auto probe_schema(const Schema& build, const Schema& probe, bool build_is_left) -> Schema {
    const auto b = build.with_index(std::nullopt);
    return build_is_left ? Schema::concat(b, probe) : Schema::concat(probe, b);
}

class ExecutorNode {
public:
    ExecutorNode(std::size_t id, CompletionQueue& done) : id_(id), done_(done) {
        thread_ = std::thread([this] { loop(); });
    }

    ~ExecutorNode() {
        stop();
        if (thread_.joinable()) thread_.join();
    }

    void send(Message m) {
        {
            std::lock_guard lock(mu_);
            inbox_.push_back(std::move(m));
        }
        cv_.notify_one();
    }

    /// Jumps the queue; everything behind it is answered as lost.
    void stop() {
        {
            std::lock_guard lock(mu_);
            Message m;
            m.kind = Message::kStop;
            inbox_.push_front(std::move(m));
        }
        cv_.notify_one();
    }

private:
    void loop() {
        for (;;) {
            Message m;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [&] { return !inbox_.empty(); });
                m = std::move(inbox_.front());
                inbox_.pop_front();
                if (m.kind == Message::kStop) {
                    for (auto& rest : inbox_) {
                        if (rest.kind == Message::kStop) continue;
                        Completion c;
                        c.kind = Completion::kLost;
                        c.ticket = rest.ticket;
                        c.executor = id_;
                        done_.push(std::move(c));
                    }
                    inbox_.clear();
                    replicas_.clear();
                    return;
                }
            }
            handle(std::move(m));
        }
    }

    void handle(Message m) {
        Completion c;
        c.ticket = m.ticket;
        c.executor = id_;
        try {
            switch (m.kind) {
                case Message::kInstall:
                    replicas_[m.task.partition] = std::move(m.replica);
                    break;
                case Message::kDeliver:
                    c.kind = Completion::kAck;
                    c.duplicate = !seen_.insert({m.shuffle_id, m.seq}).second;
                    break;
                case Message::kRun:
                    run(m, c);
                    break;
                case Message::kStop:
                    break;
            }
        } catch (const std::exception& e) {
            c.kind = Completion::kError;
            c.error = e.what();
        }
        done_.push(std::move(c));
    }

    void run(const Message& m, Completion& c) {
        const auto& task = m.task;
        const auto pid = task.partition;
        if (m.rebuild) {
            const auto t0 = std::chrono::steady_clock::now();
            replicas_[pid] = {m.rebuild_version, m.log->rebuild_partition(m.rebuild_version, pid)};
            c.rebuilt = true;
            c.rebuild_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            // The log already holds the appended rows.
            if (task.kind == TaskKind::kInsert && m.rebuild_version == task.new_version) return;
        }
        auto it = replicas_.find(pid);
        if (it == replicas_.end()) {
            c.kind = Completion::kStale;
            c.error = "partition " + std::to_string(pid) + " not hosted on executor " + std::to_string(id_);
            return;
        }
        if (stale_check(it->second, task.expected_version) == StaleCheck::kStale) {
            c.kind = Completion::kStale;
            c.error = "partition " + std::to_string(pid) + " is at version " + std::to_string(it->second.version_no) +
                      ", task expects " + std::to_string(task.expected_version);
            replicas_.erase(it);
            return;
        }
        const auto& snap = *it->second.snapshot;
        const auto& codec = snap.codec();
        const auto col = snap.index_col();
        const auto out_schema = snap.schema().with_index(std::nullopt);
        switch (task.kind) {
            case TaskKind::kLookup: {
                const Value key = coerce_value(task.key, codec.schema().column(col).type);
                if (is_null(key)) raise(ErrorCode::kTypeMismatch, "lookup key is NULL");
                std::optional<std::string_view> verify;
                if (const auto* s = std::get_if<std::string>(&key)) verify = *s;
                c.rows = PlainTable(out_schema);
                snap.for_each_match(canonical_key(key), verify, [&](RowBytes r) { c.rows.add_payload_unchecked(r); });
                break;
            }
            case TaskKind::kScan:
                c.rows = PlainTable(out_schema);
                snap.scan([&](RowBytes r) { c.rows.add_payload_unchecked(r); });
                break;
            case TaskKind::kProbe: {
                if (!task.rows) raise(ErrorCode::kInvalidPlan, "probe task without rows");
                const auto& probe = *task.rows;
                const auto& pcodec = probe.codec();
                if (pcodec.schema().column(task.probe_col).type != codec.schema().column(col).type) {
                    raise(ErrorCode::kTypeMismatch, "probe column type differs from the index column");
                }
                const bool utf8 = codec.schema().column(col).type == ColumnType::kUtf8;
                c.rows = PlainTable(probe_schema(snap.schema(), probe.schema(), task.build_is_left));
                for (std::size_t i = 0; i < probe.size(); ++i) {
                    const auto pr = probe.row(i);
                    if (pcodec.is_null(pr, task.probe_col)) continue;
                    std::optional<std::string_view> verify;
                    if (utf8) verify = pcodec.string_cell(pr, task.probe_col);
                    snap.for_each_match(canonical_key(pcodec, pr, task.probe_col), verify, [&](RowBytes b) {
                        c.rows.emplace_encoded([&](std::vector<std::uint8_t>& arena) {
                            if (task.build_is_left) RowCodec::concat_into(codec, b, pcodec, pr, arena);
                            else RowCodec::concat_into(pcodec, pr, codec, b, arena);
                        });
                    });
                }
                break;
            }
            case TaskKind::kInsert: {
                std::vector<KeyedRow> rows;
                if (task.rows) {
                    for (std::size_t i = 0; i < task.rows->size(); ++i) {
                        const auto r = task.rows->row(i);
                        rows.push_back({canonical_key(codec, r, col), r});
                    }
                }
                auto snapshot = it->second.snapshot;
                if (!rows.empty()) {
                    IndexedPartition next(*snapshot);
                    next.insert(rows);
                    snapshot = next.freeze();
                }
                it->second = {task.new_version, std::move(snapshot)};
                break;
            }
        }
    }

    std::size_t id_;
    CompletionQueue& done_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<Message> inbox_;
    std::map<std::size_t, Replica> replicas_;  // owned by the worker thread
    std::set<std::pair<std::uint64_t, std::uint64_t>> seen_;
    std::thread thread_;
};

}  // namespace

struct Cluster::Impl {
    ClusterOptions options;
    std::shared_ptr<const ReplayLog> log;
    std::shared_ptr<const RowCodec> codec;  // with index column
    std::size_t index_col = 0;
    std::size_t partitions = 0;
    CompletionQueue done;
    std::vector<std::unique_ptr<ExecutorNode>> nodes;
    std::vector<bool> alive;
    std::vector<std::size_t> inflight;
    std::vector<std::map<std::size_t, std::uint64_t>> copies;  // per partition: executor -> version
    std::vector<std::optional<std::size_t>> primary;
    std::mt19937_64 rng;
    std::size_t next_ticket = 1;
    std::uint64_t next_shuffle = 1;
    ClusterStats stats;
    std::vector<std::vector<std::shared_ptr<const PlainTable>>> queues;  // partition queues filled by shuffles
    std::optional<std::pair<std::size_t, std::size_t>> pending_kill;    // executor, at this dispatch count
    std::size_t dispatches = 0;                                         // tasks and shuffle envelopes sent

    void count_dispatch() {
        ++dispatches;
        if (pending_kill && dispatches >= pending_kill->second) {
            const auto victim = pending_kill->first;
            pending_kill.reset();
            if (alive_executors().size() > 1) kill(victim);
        }
    }

    auto alive_executors() const -> std::vector<std::size_t> {
        std::vector<std::size_t> out;
        for (std::size_t e = 0; e < alive.size(); ++e) {
            if (alive[e]) out.push_back(e);
        }
        return out;
    }

    auto pick(std::vector<std::size_t> candidates) -> std::optional<std::size_t> {
        if (candidates.empty()) return std::nullopt;
        std::uniform_int_distribution<std::size_t> d(0, candidates.size() - 1);
        return candidates[d(rng)];
    }

    void account(std::size_t bytes) {
        ++stats.messages;
        stats.message_bytes += bytes;
        stats.simulated_network_s +=
            options.message_latency_s + static_cast<double>(bytes) / options.bandwidth_bytes_per_s;
    }

    auto send(std::size_t executor, Message m) -> std::size_t {
        m.ticket = next_ticket++;
        std::size_t bytes = 64;
        if (m.task.rows) bytes += m.task.rows->byte_size();
        if (m.envelope) bytes += m.envelope->byte_size();
        account(bytes);
        ++inflight[executor];
        const auto ticket = m.ticket;
        nodes[executor]->send(std::move(m));
        return ticket;
    }

    void received(const Completion& c) {
        if (inflight[c.executor] > 0) --inflight[c.executor];
        account(64 + c.rows.byte_size());
        if (c.rebuilt) {
            ++stats.rebuilds;
            stats.rebuild_seconds.push_back(c.rebuild_s);
        }
    }

    void kill(std::size_t id) {
        if (id >= nodes.size()) raise(ErrorCode::kOutOfBounds, "no executor " + std::to_string(id));
        if (!alive[id]) return;
        const auto survivors = alive_executors().size() - 1;
        alive[id] = false;
        nodes[id]->stop();
        for (std::size_t p = 0; p < partitions; ++p) {
            copies[p].erase(id);
            if (primary[p] == id) primary[p].reset();
        }
        if (survivors == 0) raise(ErrorCode::kNoSurvivingExecutor, "executor " + std::to_string(id) + " was the last");
    }
};

Cluster::Cluster(ReplayLog log, ClusterOptions options, std::optional<std::uint64_t> version)
    : impl_(std::make_unique<Impl>()) {
    auto& s = *impl_;
    if (options.executors == 0) raise(ErrorCode::kInvalidSpec, "cluster needs at least one executor");
    if (auto cap = thread_cap()) options.executors = std::min(options.executors, *cap);
    options.envelope_rows = std::max<std::size_t>(1, options.envelope_rows);
    s.options = options;
    s.rng.seed(options.seed);
    s.log = std::make_shared<const ReplayLog>(std::move(log));
    current_ = version.value_or(s.log->latest_version());
    const auto df = s.log->replay(current_);
    s.codec = df.shared_codec();
    s.index_col = df.index_col();
    s.partitions = df.num_partitions();
    s.alive.assign(options.executors, true);
    s.inflight.assign(options.executors, 0);
    s.copies.resize(s.partitions);
    s.primary.resize(s.partitions);
    s.queues.resize(s.partitions);
    for (std::size_t e = 0; e < options.executors; ++e) s.nodes.push_back(std::make_unique<ExecutorNode>(e, s.done));

    std::set<std::size_t> waiting;
    for (std::size_t p = 0; p < s.partitions; ++p) {
        const auto e = p % options.executors;
        Message m;
        m.kind = Message::kInstall;
        m.task.partition = p;
        m.replica = {current_, df.shared_partition(p)};
        waiting.insert(s.send(e, std::move(m)));
        s.copies[p][e] = current_;
        s.primary[p] = e;
    }
    while (!waiting.empty()) {
        for (auto& c : s.done.drain(s.options.tick)) {
            s.received(c);
            waiting.erase(c.ticket);
        }
    }
}

Cluster::~Cluster() {
    if (!impl_) return;
    for (auto& n : impl_->nodes) n->stop();
    impl_->nodes.clear();
}

auto Cluster::num_partitions() const -> std::size_t { return impl_->partitions; }
auto Cluster::num_executors() const -> std::size_t { return impl_->nodes.size(); }
auto Cluster::alive(std::size_t executor) const -> bool { return impl_->alive.at(executor); }
auto Cluster::stats() const -> const ClusterStats& { return impl_->stats; }
auto Cluster::log() const -> const ReplayLog& { return *impl_->log; }
auto Cluster::schema() const -> const Schema& { return impl_->codec->schema(); }
auto Cluster::primary(std::size_t pid) const -> std::optional<std::size_t> { return impl_->primary.at(pid); }

auto Cluster::copies(std::size_t pid) const -> std::vector<std::pair<std::size_t, std::uint64_t>> {
    const auto& m = impl_->copies.at(pid);
    return {m.begin(), m.end()};
}

void Cluster::kill_executor(std::size_t id) { impl_->kill(id); }

void Cluster::kill_after(std::size_t id, std::size_t dispatches) {
    if (id >= impl_->nodes.size()) raise(ErrorCode::kOutOfBounds, "no executor " + std::to_string(id));
    impl_->pending_kill = {{id, impl_->dispatches + dispatches}};
}

auto Cluster::submit(std::vector<Task> tasks) -> std::vector<TaskResult> {
    auto& s = *impl_;
    constexpr std::size_t kMaxAttempts = 32;
    struct State {
        std::size_t wait = 0;
        bool in_flight = false;
        bool finished = false;
        bool rebuild = false;
    };
    std::vector<State> st(tasks.size());
    std::vector<TaskResult> results(tasks.size());
    std::map<std::size_t, std::size_t> tickets;  // ticket -> task index
    std::size_t finished = 0;

    auto fail = [&](std::size_t i, std::string why) {
        results[i].status = TaskStatus::kFailed;
        results[i].error = "TaskFailed: " + std::move(why);
        st[i].finished = true;
        ++finished;
    };

    auto dispatch = [&](std::size_t i, std::size_t e, bool rebuild) {
        auto& t = tasks[i];
        Message m;
        m.kind = Message::kRun;
        m.task = t;
        m.rebuild = rebuild;
        if (rebuild) {
            m.rebuild_version = t.kind == TaskKind::kInsert ? t.new_version : t.expected_version;
            m.log = s.log;
            // A rebuild replaces whatever copy the executor had.
            s.copies[t.partition][e] = m.rebuild_version;
            if (t.kind == TaskKind::kInsert || !s.primary[t.partition]) s.primary[t.partition] = e;
        }
        tickets[s.send(e, std::move(m))] = i;
        st[i].in_flight = true;
        st[i].rebuild = rebuild;
        ++results[i].attempts;
        ++s.stats.tasks;
        if (rebuild) ++s.stats.remote_tasks;
        else ++s.stats.local_tasks;
        s.count_dispatch();
    };

    auto place = [&](std::size_t i) {
        const auto& t = tasks[i];
        if (t.partition >= s.partitions) {
            fail(i, "partition " + std::to_string(t.partition) + " out of range");
            return;
        }
        if (results[i].attempts >= kMaxAttempts) {
            fail(i, "gave up after " + std::to_string(kMaxAttempts) + " attempts");
            return;
        }
        const auto live = s.alive_executors();
        if (live.empty()) {
            fail(i, "NoSurvivingExecutor");
            return;
        }
        auto free = [&](std::size_t e) { return s.inflight[e] < s.options.executor_slots; };
        const auto& copies = s.copies[t.partition];
        const auto want = t.expected_version;

        std::vector<std::size_t> good;
        if (t.kind == TaskKind::kInsert) {
            if (auto p = s.primary[t.partition]; p && s.alive[*p] && copies.contains(*p) && copies.at(*p) == want) {
                good.push_back(*p);
            }
        } else {
            if (auto p = s.primary[t.partition]; p && s.alive[*p] && copies.contains(*p) && copies.at(*p) == want) {
                good.push_back(*p);
            }
            for (const auto& [e, v] : copies) {
                if (v == want && s.alive[e] && std::find(good.begin(), good.end(), e) == good.end()) good.push_back(e);
            }
        }
        for (auto e : good) {
            if (free(e)) {
                dispatch(i, e, false);
                return;
            }
        }
        // Inserts only ever run on the primary while it lives.
        if (!good.empty() && (t.kind == TaskKind::kInsert || st[i].wait < s.options.locality_wait_ticks)) return;

        std::vector<std::size_t> candidates;
        for (auto e : live) {
            if (!free(e)) continue;
            // Keep the primary's current copy unless nothing else is free.
            if (t.kind != TaskKind::kInsert && s.primary[t.partition] == e) continue;
            candidates.push_back(e);
        }
        if (candidates.empty()) {
            for (auto e : live) {
                if (free(e)) candidates.push_back(e);
            }
        }
        if (auto e = s.pick(candidates)) dispatch(i, *e, true);
    };

    while (finished < tasks.size()) {
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (!st[i].finished && !st[i].in_flight) place(i);
        }
        if (finished == tasks.size()) break;
        auto batch = s.done.drain(s.options.tick);
        if (batch.empty()) {
            for (auto& x : st) {
                if (!x.finished && !x.in_flight) ++x.wait;
            }
            continue;
        }
        for (auto& c : batch) {
            s.received(c);
            auto it = tickets.find(c.ticket);
            if (it == tickets.end()) continue;
            const auto i = it->second;
            tickets.erase(it);
            auto& t = tasks[i];
            auto& r = results[i];
            st[i].in_flight = false;
            switch (c.kind) {
                case Completion::kDone:
                case Completion::kAck:
                    r.status = TaskStatus::kOk;
                    r.rows = std::move(c.rows);
                    r.executor = c.executor;
                    r.local = !st[i].rebuild;
                    r.rebuilt = c.rebuilt;
                    if (t.kind == TaskKind::kInsert && s.alive[c.executor]) {
                        s.copies[t.partition][c.executor] = t.new_version;
                        s.primary[t.partition] = c.executor;
                    }
                    st[i].finished = true;
                    ++finished;
                    break;
                case Completion::kStale: {
                    ++s.stats.stale_tasks;
                    ++r.stale_retries;
                    // The executor dropped its copy on the stale check.
                    s.copies[t.partition].erase(c.executor);
                    if (s.primary[t.partition] == c.executor) s.primary[t.partition].reset();
                    st[i].wait = 0;
                    break;
                }
                case Completion::kLost:
                    st[i].wait = 0;
                    break;
                case Completion::kError:
                    fail(i, c.error);
                    break;
            }
        }
    }
    return results;
}

auto Cluster::submit_on(std::size_t executor, Task task) -> TaskResult {
    auto& s = *impl_;
    TaskResult r;
    r.executor = executor;
    r.attempts = 1;
    if (executor >= s.nodes.size() || !s.alive[executor]) {
        r.status = TaskStatus::kFailed;
        r.error = "TaskFailed: executor " + std::to_string(executor) + " is not alive";
        return r;
    }
    const auto pid = task.partition;
    const auto kind = task.kind;
    const auto new_version = task.new_version;
    Message m;
    m.kind = Message::kRun;
    m.task = std::move(task);
    const auto ticket = s.send(executor, std::move(m));
    ++s.stats.tasks;
    ++s.stats.local_tasks;
    for (;;) {
        for (auto& c : s.done.drain(s.options.tick)) {
            s.received(c);
            if (c.ticket != ticket) continue;
            switch (c.kind) {
                case Completion::kStale:
                    ++s.stats.stale_tasks;
                    s.copies.at(pid).erase(executor);
                    if (s.primary.at(pid) == executor) s.primary[pid].reset();
                    r.status = TaskStatus::kFailed;
                    r.error = "StaleTask: " + c.error;
                    r.stale_retries = 1;
                    break;
                case Completion::kLost:
                    r.status = TaskStatus::kFailed;
                    r.error = "TaskFailed: executor lost";
                    break;
                case Completion::kError:
                    r.status = TaskStatus::kFailed;
                    r.error = "TaskFailed: " + c.error;
                    break;
                default:
                    r.rows = std::move(c.rows);
                    if (kind == TaskKind::kInsert) s.copies.at(pid)[executor] = new_version;
                    break;
            }
            return r;
        }
    }
}

void Cluster::replicate(std::size_t pid, std::size_t executor) {
    auto& s = *impl_;
    if (pid >= s.partitions) raise(ErrorCode::kOutOfBounds, "no partition " + std::to_string(pid));
    if (executor >= s.nodes.size() || !s.alive[executor]) {
        raise(ErrorCode::kOutOfBounds, "executor " + std::to_string(executor) + " is not alive");
    }
    Message m;
    m.kind = Message::kInstall;
    m.task.partition = pid;
    m.replica = {current_, s.log->rebuild_partition(current_, pid)};
    const auto ticket = s.send(executor, std::move(m));
    s.copies[pid][executor] = current_;
    if (!s.primary[pid]) s.primary[pid] = executor;
    for (;;) {
        for (auto& c : s.done.drain(s.options.tick)) {
            s.received(c);
            if (c.ticket == ticket) return;
        }
    }
}

auto Cluster::shuffle(const PlainTable& rows, const std::function<std::size_t(RowBytes)>& router) -> ShuffleReport {
    auto& s = *impl_;
    ShuffleReport report;
    report.delivered.assign(s.partitions, 0);
    if (rows.empty()) return report;
    const auto shuffle_id = s.next_shuffle++;

    struct Envelope {
        std::size_t partition;
        std::shared_ptr<const PlainTable> rows;
        std::size_t acks = 0;
    };
    std::vector<Envelope> envelopes;
    {
        std::vector<std::unique_ptr<PlainTable>> open(s.partitions);
        auto flush = [&](std::size_t p) {
            if (open[p] && !open[p]->empty()) envelopes.push_back({p, std::move(open[p]), 0});
            open[p].reset();
        };
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto r = rows.row(i);
            const auto p = router(r);
            if (p >= s.partitions) raise(ErrorCode::kOutOfBounds, "router sent a row to partition " + std::to_string(p));
            if (!open[p]) open[p] = std::make_unique<PlainTable>(rows.schema());
            open[p]->add_payload_unchecked(r);
            if (open[p]->size() >= s.options.envelope_rows) flush(p);
        }
        for (std::size_t p = 0; p < s.partitions; ++p) flush(p);
    }
    report.envelopes = envelopes.size();

    std::vector<std::optional<std::size_t>> receiver(s.partitions);
    auto destination = [&](std::size_t p) -> std::optional<std::size_t> {
        if (receiver[p] && s.alive[*receiver[p]]) return receiver[p];
        if (auto pr = s.primary[p]; pr && s.alive[*pr]) return receiver[p] = pr;
        return receiver[p] = s.pick(s.alive_executors());
    };

    std::map<std::size_t, std::size_t> tickets;  // ticket -> envelope
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < envelopes.size(); ++i) pending.push_back(i);
    std::size_t acked = 0;
    bool first = true;
    while (acked < envelopes.size()) {
        for (auto i : pending) {
            const auto dest = destination(envelopes[i].partition);
            if (!dest) raise(ErrorCode::kNoSurvivingExecutor, "no executor left to receive a shuffle");
            Message m;
            m.kind = Message::kDeliver;
            m.envelope = envelopes[i].rows;
            m.shuffle_id = shuffle_id;
            m.seq = i;
            if (!first) ++report.resent;
            tickets[s.send(*dest, std::move(m))] = i;
            s.count_dispatch();
        }
        pending.clear();
        first = false;
        for (auto& c : s.done.drain(s.options.tick)) {
            s.received(c);
            auto it = tickets.find(c.ticket);
            if (it == tickets.end()) continue;
            const auto i = it->second;
            tickets.erase(it);
            if (c.kind == Completion::kLost || c.kind == Completion::kError) {
                pending.push_back(i);
                continue;
            }
            auto& env = envelopes[i];
            if (c.duplicate || env.acks > 0) {
                ++report.duplicates_dropped;
                continue;
            }
            ++env.acks;
            ++acked;
            report.delivered[env.partition] += env.rows->size();
            s.queues[env.partition].push_back(env.rows);
        }
    }
    std::size_t total = 0;
    for (const auto& e : envelopes) {
        if (e.acks != 1) report.audit_ok = false;
    }
    for (auto d : report.delivered) total += d;
    if (total != rows.size()) report.audit_ok = false;
    return report;
}

namespace {

/// Concatenates and clears a partition queue.
auto take_queue(std::vector<std::shared_ptr<const PlainTable>>& q, const Schema& schema)
    -> std::shared_ptr<const PlainTable> {
    if (q.empty()) return nullptr;
    if (q.size() == 1) {
        auto t = std::move(q.front());
        q.clear();
        return t;
    }
    auto t = std::make_shared<PlainTable>(schema);
    for (const auto& part : q) t->append_table(*part);
    q.clear();
    return t;
}

}  // namespace

auto Cluster::append(const PlainTable& rows) -> std::uint64_t {
    auto& s = *impl_;
    const auto& schema = s.codec->schema();
    if (!rows.schema().same_columns(schema)) {
        raise(ErrorCode::kSchemaMismatch, "append of " + format_schema(rows.schema()) + " to " + format_schema(schema));
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows.codec().is_null(rows.row(i), s.index_col)) {
            raise(ErrorCode::kTypeMismatch, "row " + std::to_string(i) + " has NULL in the index column");
        }
    }
    const auto parent = current_;
    const auto version = s.log->latest_version() + 1;
    {
        ReplayLog next = *s.log;
        next.record_append(AppendEntry{version, parent, rows.with_schema(schema.with_index(std::nullopt))});
        s.log = std::make_shared<const ReplayLog>(std::move(next));
    }
    for (auto& q : s.queues) q.clear();
    const auto& codec = *s.codec;
    const auto col = s.index_col;
    const auto P = s.partitions;
    shuffle(rows, [&](RowBytes r) { return partition_of(canonical_key(codec, r, col), P); });

    std::vector<Task> tasks;
    for (std::size_t p = 0; p < P; ++p) {
        Task t;
        t.kind = TaskKind::kInsert;
        t.partition = p;
        t.expected_version = parent;
        t.new_version = version;
        t.rows = take_queue(s.queues[p], rows.schema());
        tasks.push_back(std::move(t));
    }
    current_ = version;
    for (const auto& r : submit(std::move(tasks))) {
        if (r.status != TaskStatus::kOk) raise(ErrorCode::kTaskFailed, "append: " + r.error);
    }
    return version;
}

auto Cluster::lookup(const Value& key, std::optional<std::uint64_t> version) -> PlainTable {
    auto& s = *impl_;
    const auto& column = s.codec->schema().column(s.index_col);
    if (is_null(key)) raise(ErrorCode::kTypeMismatch, "lookup key is NULL");
    const Value typed = coerce_value(key, column.type);
    Task t;
    t.kind = TaskKind::kLookup;
    t.partition = partition_of(canonical_key(typed), s.partitions);
    t.expected_version = version.value_or(current_);
    if (!s.log->contains(t.expected_version)) {
        raise(ErrorCode::kOutOfBounds, "unknown version " + std::to_string(t.expected_version));
    }
    t.key = typed;
    auto r = submit({t});
    if (r[0].status != TaskStatus::kOk) raise(ErrorCode::kTaskFailed, r[0].error);
    return std::move(r[0].rows);
}

auto Cluster::join(const PlainTable& probe, std::size_t probe_col, bool build_is_left) -> PlainTable {
    auto& s = *impl_;
    const auto& bschema = s.codec->schema();
    if (probe_col >= probe.schema().size()) {
        raise(ErrorCode::kUnresolvedColumn, "probe column " + std::to_string(probe_col) + " out of range");
    }
    if (probe.schema().column(probe_col).type != bschema.column(s.index_col).type) {
        raise(ErrorCode::kTypeMismatch, "probe column type differs from the index column");
    }
    PlainTable out(probe_schema(bschema, probe.schema(), build_is_left));
    if (probe.empty()) return out;
    for (auto& q : s.queues) q.clear();
    const auto P = s.partitions;
    const auto& pcodec = probe.codec();
    // NULL keys never match; park them on partition 0, whose probe skips them.
    shuffle(probe, [&](RowBytes r) {
        return pcodec.is_null(r, probe_col) ? std::size_t{0} : partition_of(canonical_key(pcodec, r, probe_col), P);
    });
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < P; ++p) {
        auto rows = take_queue(s.queues[p], probe.schema());
        if (!rows) continue;
        Task t;
        t.kind = TaskKind::kProbe;
        t.partition = p;
        t.expected_version = current_;
        t.rows = std::move(rows);
        t.probe_col = probe_col;
        t.build_is_left = build_is_left;
        tasks.push_back(std::move(t));
    }
    for (auto& r : submit(std::move(tasks))) {
        if (r.status != TaskStatus::kOk) raise(ErrorCode::kTaskFailed, "join: " + r.error);
        out.append_table(r.rows);
    }
    return out;
}

}  // namespace ixframe
