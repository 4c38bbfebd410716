#include <ixframe/hash_trie.hpp>

namespace ixframe {

namespace {
std::atomic<std::uint64_t> g_edit_tokens{1};
std::atomic<std::uint64_t> g_nodes_allocated{0};
}  // namespace

namespace trie_detail {

auto next_edit_token() -> std::uint64_t {
    return g_edit_tokens.fetch_add(1, std::memory_order_relaxed);
}

void count_node_allocation() {
    g_nodes_allocated.fetch_add(1, std::memory_order_relaxed);
}

}  // namespace trie_detail

auto trie_nodes_allocated() -> std::uint64_t {
    return g_nodes_allocated.load(std::memory_order_relaxed);
}

}  // namespace ixframe
