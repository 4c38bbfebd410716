#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <new>
#include <optional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

namespace ixframe {

namespace trie_detail {

inline constexpr unsigned kBitsPerLevel = 5;
inline constexpr unsigned kBranching = 1u << kBitsPerLevel;
inline constexpr unsigned kMaxDepth = 13;  // ceil(64 / 5)

/// Bijective 64-bit mixer (splitmix64 finalizer). Distinct keys always have
/// distinct hashes, so the trie never needs collision lists.
constexpr auto mix(std::uint64_t x) -> std::uint64_t {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

constexpr auto chunk(std::uint64_t hash, unsigned level) -> unsigned {
    return static_cast<unsigned>(hash >> (level * kBitsPerLevel)) & (kBranching - 1);
}

/// Unique, never-reused edit tokens. Zero is never handed out.
auto next_edit_token() -> std::uint64_t;
void count_node_allocation();

/// Approximate size of a shared_ptr control block fused with its node.
inline constexpr std::size_t kControlBlockBytes = 16;

}  // namespace trie_detail

/// Total trie nodes allocated by this process. Tests use deltas of this
/// counter to check structural sharing.
auto trie_nodes_allocated() -> std::uint64_t;

/// A shared_ptr cell with atomic load/store/compare-exchange. The critical
/// section covers only the reference count update.
template <class T>
class SharedSlot {
public:
    explicit SharedSlot(std::shared_ptr<T> value) : value_(std::move(value)) {}

    SharedSlot(const SharedSlot&) = delete;
    auto operator=(const SharedSlot&) -> SharedSlot& = delete;

    [[nodiscard]] auto load() const -> std::shared_ptr<T> {
        Guard g(lock_);
        return value_;
    }

    void store(std::shared_ptr<T> desired) {
        std::shared_ptr<T> old;
        {
            Guard g(lock_);
            old = std::exchange(value_, std::move(desired));
        }
    }

    /// Replaces the value with `desired` iff it still points at `expected`.
    auto compare_exchange(const std::shared_ptr<T>& expected, std::shared_ptr<T> desired) -> bool {
        std::shared_ptr<T> old;
        {
            Guard g(lock_);
            if (value_ != expected) return false;
            old = std::exchange(value_, std::move(desired));
        }
        return true;
    }

private:
    struct Guard {
        explicit Guard(std::atomic_flag& f) : flag(f) {
            while (flag.test_and_set(std::memory_order_acquire)) {
                std::this_thread::yield();
            }
        }
        ~Guard() { flag.clear(std::memory_order_release); }
        std::atomic_flag& flag;
    };

    mutable std::atomic_flag lock_ = ATOMIC_FLAG_INIT;
    std::shared_ptr<T> value_;
};

template <class V>
struct TrieNode {
    using Ptr = std::shared_ptr<TrieNode>;

    struct Leaf {
        std::uint64_t key;
        V value;
    };

    std::uint64_t edit = 0;   // token of the editor allowed to mutate in place
    std::uint64_t count = 0;  // entries in this subtree
    std::uint32_t leaf_map = 0;
    std::uint32_t child_map = 0;

    TrieNode() = default;
    TrieNode(const TrieNode& other)
        : edit(other.edit), count(other.count), leaf_map(other.leaf_map), child_map(other.child_map) {
        block_ = allocate(leaf_map, child_map);
        const auto ol = other.leaves();
        const auto oc = other.children();
        for (std::size_t i = 0; i < ol.size(); ++i) new (leaf_at(block_, i)) Leaf(ol[i]);
        for (std::size_t i = 0; i < oc.size(); ++i) new (child_at(block_, leaf_map, i)) Ptr(oc[i]);
    }
    auto operator=(const TrieNode&) -> TrieNode& = delete;
    ~TrieNode() { release(block_, leaf_map, child_map); }

    static auto make(std::uint64_t edit) -> Ptr {
        trie_detail::count_node_allocation();
        auto n = std::make_shared<TrieNode>();
        n->edit = edit;
        return n;
    }

    [[nodiscard]] auto clone(std::uint64_t token) const -> Ptr {
        trie_detail::count_node_allocation();
        auto n = std::make_shared<TrieNode>(*this);
        n->edit = token;
        return n;
    }

    static auto rank(std::uint32_t map, std::uint32_t bit) -> std::size_t {
        return static_cast<std::size_t>(std::popcount(map & (bit - 1)));
    }

    // Leaves and children live in one exactly-sized block, leaves first;
    // their counts come from the bitmaps.
    [[nodiscard]] auto leaves() -> std::span<Leaf> {
        return {leaf_at(block_, 0), static_cast<std::size_t>(std::popcount(leaf_map))};
    }
    [[nodiscard]] auto leaves() const -> std::span<const Leaf> {
        return {leaf_at(block_, 0), static_cast<std::size_t>(std::popcount(leaf_map))};
    }
    [[nodiscard]] auto children() -> std::span<Ptr> {
        return {child_at(block_, leaf_map, 0), static_cast<std::size_t>(std::popcount(child_map))};
    }
    [[nodiscard]] auto children() const -> std::span<const Ptr> {
        return {child_at(block_, leaf_map, 0), static_cast<std::size_t>(std::popcount(child_map))};
    }

    /// Moves the node to a new shape. Entries present in both shapes are
    /// carried over; a bit new to the leaf (child) map takes `*add_leaf`
    /// (`*add_child`); entries whose bits disappear are destroyed.
    void reshape(std::uint32_t new_leaf_map, std::uint32_t new_child_map, Leaf* add_leaf = nullptr,
                 Ptr* add_child = nullptr) {
        std::byte* block = allocate(new_leaf_map, new_child_map);
        std::size_t i = 0;
        for (std::uint32_t m = new_leaf_map; m != 0; m &= m - 1, ++i) {
            const std::uint32_t bit = m & (~m + 1);
            Leaf* src = (leaf_map & bit) ? &leaves()[rank(leaf_map, bit)] : add_leaf;
            new (leaf_at(block, i)) Leaf(std::move(*src));
        }
        i = 0;
        for (std::uint32_t m = new_child_map; m != 0; m &= m - 1, ++i) {
            const std::uint32_t bit = m & (~m + 1);
            Ptr* src = (child_map & bit) ? &children()[rank(child_map, bit)] : add_child;
            new (child_at(block, new_leaf_map, i)) Ptr(std::move(*src));
        }
        release(block_, leaf_map, child_map);
        block_ = block;
        leaf_map = new_leaf_map;
        child_map = new_child_map;
    }

    [[nodiscard]] auto footprint() const -> std::size_t {
        return sizeof(TrieNode) + trie_detail::kControlBlockBytes + block_bytes(leaf_map, child_map);
    }

private:
    static auto child_offset(std::uint32_t lm) -> std::size_t {
        const std::size_t raw = static_cast<std::size_t>(std::popcount(lm)) * sizeof(Leaf);
        return (raw + alignof(Ptr) - 1) / alignof(Ptr) * alignof(Ptr);
    }
    static auto block_bytes(std::uint32_t lm, std::uint32_t cm) -> std::size_t {
        return child_offset(lm) + static_cast<std::size_t>(std::popcount(cm)) * sizeof(Ptr);
    }
    static constexpr std::align_val_t kAlign{std::max(alignof(Leaf), alignof(Ptr))};

    static auto allocate(std::uint32_t lm, std::uint32_t cm) -> std::byte* {
        const auto bytes = block_bytes(lm, cm);
        return bytes == 0 ? nullptr : static_cast<std::byte*>(::operator new(bytes, kAlign));
    }
    static void release(std::byte* block, std::uint32_t lm, std::uint32_t cm) {
        if (block == nullptr) return;
        const auto nl = static_cast<std::size_t>(std::popcount(lm));
        const auto nc = static_cast<std::size_t>(std::popcount(cm));
        for (std::size_t i = 0; i < nl; ++i) leaf_at(block, i)->~Leaf();
        for (std::size_t i = 0; i < nc; ++i) child_at(block, lm, i)->~Ptr();
        ::operator delete(block, kAlign);
    }
    static auto leaf_at(std::byte* block, std::size_t i) -> Leaf* {
        return std::launder(reinterpret_cast<Leaf*>(block)) + i;
    }
    static auto leaf_at(const std::byte* block, std::size_t i) -> const Leaf* {
        return std::launder(reinterpret_cast<const Leaf*>(block)) + i;
    }
    static auto child_at(std::byte* block, std::uint32_t lm, std::size_t i) -> Ptr* {
        return std::launder(reinterpret_cast<Ptr*>(block + child_offset(lm))) + i;
    }
    static auto child_at(const std::byte* block, std::uint32_t lm, std::size_t i) -> const Ptr* {
        return std::launder(reinterpret_cast<const Ptr*>(block + child_offset(lm))) + i;
    }

    std::byte* block_ = nullptr;
};

/// Shape of one node, reported by TrieSnapshot::visit_nodes.
struct TrieNodeInfo {
    unsigned depth;
    std::size_t leaves;
    std::size_t children;
};

template <class V>
class HashTrie;

/// Immutable view of a trie at one linearization point. Cheap to copy; all
/// copies share structure with the live trie they came from.
template <class V>
class TrieSnapshot {
public:
    using Node = TrieNode<V>;

    TrieSnapshot() = default;

    [[nodiscard]] auto size() const -> std::size_t { return root_ ? static_cast<std::size_t>(root_->count) : 0; }
    [[nodiscard]] auto empty() const -> bool { return size() == 0; }

    /// Pointer into the snapshot; valid while any copy of it is alive.
    [[nodiscard]] auto find(std::uint64_t key) const -> const V* { return find_in(root_.get(), key); }

    [[nodiscard]] auto get(std::uint64_t key) const -> std::optional<V> {
        if (const V* v = find(key)) return *v;
        return std::nullopt;
    }

    /// Visits entries in hash order.
    template <class F>
    void for_each(F&& fn) const {
        if (root_) for_each_in(*root_, fn);
    }

    /// Entries sorted by key.
    [[nodiscard]] auto entries() const -> std::vector<std::pair<std::uint64_t, V>> {
        std::vector<std::pair<std::uint64_t, V>> out;
        out.reserve(size());
        for_each([&](std::uint64_t k, const V& v) { out.emplace_back(k, v); });
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        return out;
    }

    [[nodiscard]] auto footprint_bytes() const -> std::size_t {
        std::size_t total = 0;
        if (root_) footprint_in(*root_, total);
        return total;
    }

    template <class F>
    void visit_nodes(F&& fn) const {
        if (root_) visit_in(*root_, 0, fn);
    }

    /// Identity of the root node, for structural-sharing checks.
    [[nodiscard]] auto root_identity() const -> const void* { return root_.get(); }

    static auto find_in(const Node* n, std::uint64_t key) -> const V* {
        const std::uint64_t h = trie_detail::mix(key);
        for (unsigned level = 0; n != nullptr; ++level) {
            const std::uint32_t bit = 1u << trie_detail::chunk(h, level);
            if (n->child_map & bit) {
                n = n->children()[Node::rank(n->child_map, bit)].get();
            } else if (n->leaf_map & bit) {
                const auto& leaf = n->leaves()[Node::rank(n->leaf_map, bit)];
                return leaf.key == key ? &leaf.value : nullptr;
            } else {
                return nullptr;
            }
        }
        return nullptr;
    }

private:
    friend class HashTrie<V>;

    explicit TrieSnapshot(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    template <class F>
    static void for_each_in(const Node& n, F& fn) {
        // Leaves and children interleave by chunk; hash order visits them by chunk.
        std::size_t li = 0;
        std::size_t ci = 0;
        for (unsigned c = 0; c < trie_detail::kBranching; ++c) {
            const std::uint32_t bit = 1u << c;
            if (n.leaf_map & bit) {
                const auto& leaf = n.leaves()[li++];
                fn(leaf.key, leaf.value);
            } else if (n.child_map & bit) {
                for_each_in(*n.children()[ci++], fn);
            }
        }
    }

    static void footprint_in(const Node& n, std::size_t& total) {
        total += n.footprint();
        for (const auto& c : n.children()) footprint_in(*c, total);
    }

    template <class F>
    static void visit_in(const Node& n, unsigned depth, F& fn) {
        fn(TrieNodeInfo{depth, n.leaves().size(), n.children().size()});
        for (const auto& c : n.children()) visit_in(*c, depth + 1, fn);
    }

    std::shared_ptr<const Node> root_;
};

/// Concurrent hash-array-mapped trie from 64-bit keys to V.
///
/// Writers never mutate published nodes: every update builds a new path and
/// publishes a new root with compare-exchange, so a snapshot is just a copy
/// of the root pointer. Readers load the root and walk without locks.
///
/// Bulk updates go through an Editor: nodes it creates carry its edit token
/// and are mutated in place until commit, after which the token is retired.
template <class V>
class HashTrie {
public:
    using Node = TrieNode<V>;
    using NodePtr = typename Node::Ptr;

    HashTrie() : root_(Node::make(0)) {}

    /// Live trie that starts from `base`; O(1), shares all nodes.
    explicit HashTrie(const TrieSnapshot<V>& base)
        : root_(base.root_ ? std::const_pointer_cast<Node>(base.root_) : Node::make(0)) {}

    HashTrie(const HashTrie&) = delete;
    auto operator=(const HashTrie&) -> HashTrie& = delete;

    /// Single-owner batch of updates applied atomically at commit().
    class Editor {
    public:
        explicit Editor(HashTrie& trie)
            : trie_(&trie), base_(trie.root_.load()), root_(base_), token_(trie_detail::next_edit_token()) {}

        Editor(const Editor&) = delete;
        auto operator=(const Editor&) -> Editor& = delete;
        Editor(Editor&&) noexcept = default;
        auto operator=(Editor&&) noexcept -> Editor& = default;

        [[nodiscard]] auto find(std::uint64_t key) const -> const V* {
            return TrieSnapshot<V>::find_in(root_.get(), key);
        }

        auto upsert(std::uint64_t key, V value) -> std::optional<V> {
            check_open();
            if (root_->edit != token_) root_ = root_->clone(token_);
            const std::uint64_t h = trie_detail::mix(key);
            Node* path[trie_detail::kMaxDepth + 1];
            unsigned depth = 0;
            Node* n = root_.get();
            for (unsigned level = 0;; ++level) {
                const std::uint32_t bit = 1u << trie_detail::chunk(h, level);
                if (n->child_map & bit) {
                    auto& child = n->children()[Node::rank(n->child_map, bit)];
                    if (child->edit != token_) child = child->clone(token_);
                    path[depth++] = n;
                    n = child.get();
                    continue;
                }
                if (n->leaf_map & bit) {
                    auto& leaf = n->leaves()[Node::rank(n->leaf_map, bit)];
                    if (leaf.key == key) {
                        std::optional<V> old(std::move(leaf.value));
                        leaf.value = std::move(value);
                        return old;
                    }
                    auto child = split(level + 1, std::move(leaf), typename Node::Leaf{key, std::move(value)});
                    n->reshape(n->leaf_map & ~bit, n->child_map | bit, nullptr, &child);
                } else {
                    typename Node::Leaf leaf{key, std::move(value)};
                    n->reshape(n->leaf_map | bit, n->child_map, &leaf);
                }
                ++n->count;
                for (unsigned i = 0; i < depth; ++i) ++path[i]->count;
                return std::nullopt;
            }
        }

        auto erase(std::uint64_t key) -> std::optional<V> {
            check_open();
            if (find(key) == nullptr) return std::nullopt;
            if (root_->edit != token_) root_ = root_->clone(token_);
            return erase_in(*root_, 0, trie_detail::mix(key), key);
        }

        [[nodiscard]] auto size() const -> std::size_t { return static_cast<std::size_t>(root_->count); }

        /// Publishes the edits. Returns false (and publishes nothing) if
        /// another writer committed since this editor was opened.
        auto commit() -> bool {
            check_open();
            committed_ = true;
            if (root_ == base_) return true;
            return trie_->root_.compare_exchange(base_, root_);
        }

    private:
        void check_open() const {
            if (committed_) throw std::logic_error("trie editor used after commit");
        }

        auto split(unsigned level, typename Node::Leaf a, typename Node::Leaf b) -> NodePtr {
            auto n = Node::make(token_);
            n->count = 2;
            const unsigned ca = trie_detail::chunk(trie_detail::mix(a.key), level);
            const unsigned cb = trie_detail::chunk(trie_detail::mix(b.key), level);
            if (ca == cb) {
                auto child = split(level + 1, std::move(a), std::move(b));
                n->reshape(0, 1u << ca, nullptr, &child);
            } else {
                // reshape pulls each new leaf from `add_leaf`; place them one at a time.
                n->reshape(1u << ca, 0, &a);
                n->reshape(n->leaf_map | (1u << cb), 0, &b);
            }
            return n;
        }

        auto erase_in(Node& n, unsigned level, std::uint64_t h, std::uint64_t key) -> std::optional<V> {
            const std::uint32_t bit = 1u << trie_detail::chunk(h, level);
            if (n.leaf_map & bit) {
                std::optional<V> old(std::move(n.leaves()[Node::rank(n.leaf_map, bit)].value));
                n.reshape(n.leaf_map & ~bit, n.child_map);
                --n.count;
                return old;
            }
            auto& child = n.children()[Node::rank(n.child_map, bit)];
            if (child->edit != token_) child = child->clone(token_);
            auto old = erase_in(*child, level + 1, h, key);
            --n.count;
            if (child->count == 0) {
                n.reshape(n.leaf_map, n.child_map & ~bit);
            } else if (child->count == 1 && child->child_map == 0) {
                // Pull a lone leaf back up so the shape stays canonical.
                typename Node::Leaf leaf = std::move(child->leaves().front());
                n.reshape(n.leaf_map | bit, n.child_map & ~bit, &leaf);
            }
            return old;
        }

        HashTrie* trie_;
        NodePtr base_;
        NodePtr root_;
        std::uint64_t token_;
        bool committed_ = false;
    };

    [[nodiscard]] auto edit() -> Editor { return Editor(*this); }

    /// Linearizable upsert; returns the displaced value.
    auto insert(std::uint64_t key, V value) -> std::optional<V> {
        for (;;) {
            Editor e(*this);
            auto old = e.upsert(key, value);
            if (e.commit()) return old;
        }
    }

    auto erase(std::uint64_t key) -> std::optional<V> {
        for (;;) {
            Editor e(*this);
            auto old = e.erase(key);
            if (e.commit()) return old;
        }
    }

    [[nodiscard]] auto get(std::uint64_t key) const -> std::optional<V> {
        auto root = root_.load();
        if (const V* v = TrieSnapshot<V>::find_in(root.get(), key)) return *v;
        return std::nullopt;
    }

    [[nodiscard]] auto snapshot() const -> TrieSnapshot<V> { return TrieSnapshot<V>(root_.load()); }

    [[nodiscard]] auto size() const -> std::size_t { return static_cast<std::size_t>(root_.load()->count); }

private:
    SharedSlot<Node> root_;
};

using KeyTrie = HashTrie<std::uint64_t>;
using KeyTrieSnapshot = TrieSnapshot<std::uint64_t>;

}  // namespace ixframe
