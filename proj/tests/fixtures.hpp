#pragma once

#include <vector>

#include "dagp/graph.hpp"

// Canonical fixtures used throughout the suite. Node ids here are 0-based;
// the prose names (1..n) map to ids 0..n-1.
namespace fixtures {

using dagp::DirectedGraph;

inline DirectedGraph make_graph(std::size_t n,
                                const std::vector<DirectedGraph::Edge>& edges,
                                std::vector<double> node_weights = {},
                                std::vector<double> exec_times = {}) {
    if (node_weights.empty()) node_weights.assign(n, 1.0);
    return DirectedGraph::build(n, std::move(node_weights), std::move(exec_times), edges);
}

// 1 -> 2 -> 3, unit weights
inline DirectedGraph chain3() {
    return make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}});
}

// 1 -> 2 (w=1), 1 -> 3 (w=2), 2 -> 4 (w=1), 3 -> 4 (w=3), unit node weights
inline DirectedGraph diamond() {
    return make_graph(4, {{0, 1, 1.0}, {0, 2, 2.0}, {1, 3, 1.0}, {2, 3, 3.0}});
}

// 1 -> 2 -> 1 (smallest cyclic graph)
inline DirectedGraph cyc2() {
    return make_graph(2, {{0, 1, 1.0}, {1, 0, 1.0}});
}

} // namespace fixtures
