#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

// Addressing for the full binary tree: generation g holds 2^g nodes,
// indexed 0..2^g-1 by the bit path from the root.

namespace bmc {

// Depths above this would overflow 64-bit node counts (and are far
// beyond anything simulable anyway).
inline constexpr int kMaxDepth = 60;

struct NodeId {
    int generation = 0;
    std::uint64_t index = 0;

    friend bool operator==(const NodeId&, const NodeId&) = default;
};

inline void check_depth(int n) {
    if (n < 0 || n > kMaxDepth)
        throw std::out_of_range("tree depth out of supported range [0, 60]");
}

// |G_n| = 2^n
inline std::uint64_t generation_size(int n) {
    check_depth(n);
    return std::uint64_t{1} << n;
}

// |T_n| = 2^{n+1} - 1
inline std::uint64_t tree_size(int n) {
    check_depth(n);
    return (std::uint64_t{2} << n) - 1;
}

inline bool is_valid(const NodeId& id) {
    return id.generation >= 0 && id.generation <= kMaxDepth &&
           id.index < generation_size(id.generation);
}

inline std::pair<NodeId, NodeId> children(const NodeId& id) {
    check_depth(id.generation + 1);
    return {NodeId{id.generation + 1, 2 * id.index},
            NodeId{id.generation + 1, 2 * id.index + 1}};
}

inline NodeId parent(const NodeId& id) {
    if (id.generation < 1)
        throw std::invalid_argument("root has no parent");
    return NodeId{id.generation - 1, id.index / 2};
}

} // namespace bmc
