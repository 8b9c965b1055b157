#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "dagp/graph.hpp"

namespace dagp {

/// Layered random DAG in the spirit of compiled dataflow graphs: nodes are
/// assigned to `layers` consecutive layers, every node below the top layer
/// receives one guaranteed predecessor from the layer above, and each
/// adjacent-layer pair is additionally connected with probability `density`.
/// Edge weights and exec times are uniform integers in [1, 10], node weights
/// are 1. Acyclic by construction since edges only point downward.
inline DirectedGraph generate_layered_dag(std::uint32_t nodes, std::uint32_t layers,
                                          double density, std::mt19937_64& rng) {
    if (nodes == 0) throw std::invalid_argument("node count must be positive");
    if (layers == 0) throw std::invalid_argument("layer count must be positive");
    if (density < 0.0 || density > 1.0)
        throw std::invalid_argument("density must lie in [0, 1]");
    if (layers > nodes) layers = nodes;

    // layer l covers ids [start[l], start[l+1])
    std::vector<NodeId> start(layers + 1, 0);
    for (std::uint32_t l = 0; l <= layers; ++l)
        start[l] = static_cast<NodeId>(static_cast<std::uint64_t>(nodes) * l / layers);

    auto rand_int = [&](std::uint32_t lo, std::uint32_t hi) { // inclusive
        return lo + static_cast<std::uint32_t>(rng() % (hi - lo + 1));
    };

    std::set<std::pair<NodeId, NodeId>> picked;
    for (std::uint32_t l = 0; l + 1 < layers; ++l) {
        for (NodeId v = start[l + 1]; v < start[l + 2]; ++v)
            picked.emplace(rand_int(start[l], start[l + 1] - 1), v);
        if (density > 0.0) {
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            for (NodeId u = start[l]; u < start[l + 1]; ++u)
                for (NodeId v = start[l + 1]; v < start[l + 2]; ++v)
                    if (coin(rng) <= density) picked.emplace(u, v);
        }
    }

    std::vector<DirectedGraph::Edge> edges;
    edges.reserve(picked.size());
    for (const auto& [u, v] : picked)
        edges.push_back({u, v, static_cast<double>(rand_int(1, 10))});

    std::vector<double> weights(nodes, 1.0);
    std::vector<double> exec(nodes);
    for (auto& t : exec) t = static_cast<double>(rand_int(1, 10));
    return DirectedGraph::build(nodes, std::move(weights), std::move(exec), edges);
}

} // namespace dagp
