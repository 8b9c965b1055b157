#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dagp/errors.hpp"

namespace dagp {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Weighted directed graph with stable edge ids, immutable once built.
///
/// Node ids are 0-based internally; file formats use 1-based ids. Every node
/// carries a weight (code size) and an execution time, every edge a positive
/// communication weight. Self-loops are rejected and parallel edges are merged
/// by weight addition at construction, so edge ids stay stable identifiers of
/// (source, target) pairs.
class DirectedGraph {
public:
    struct Edge {
        NodeId source;
        NodeId target;
        double weight;

        bool operator==(const Edge&) const = default;
    };

    DirectedGraph() = default;

    /// Builds a graph, merging parallel edges by weight addition. The number of
    /// merged duplicates is reported through `merged_parallel` when non-null.
    static DirectedGraph build(std::size_t node_count,
                               std::vector<double> node_weights,
                               std::vector<double> exec_times,
                               const std::vector<Edge>& edges,
                               std::size_t* merged_parallel = nullptr) {
        if (node_weights.size() != node_count)
            throw std::invalid_argument("node weight count does not match node count");
        if (exec_times.empty())
            exec_times.assign(node_count, 0.0);
        if (exec_times.size() != node_count)
            throw std::invalid_argument("exec time count does not match node count");
        for (double w : node_weights)
            if (w < 0.0) throw std::invalid_argument("negative node weight");
        for (double t : exec_times)
            if (t < 0.0) throw std::invalid_argument("negative exec time");

        DirectedGraph g;
        g.node_weight_ = std::move(node_weights);
        g.exec_time_ = std::move(exec_times);
        g.total_weight_ = 0.0;
        for (double w : g.node_weight_) g.total_weight_ += w;

        for (const Edge& e : edges) {
            if (e.source >= node_count || e.target >= node_count)
                throw std::invalid_argument("edge endpoint out of range");
            if (e.source == e.target)
                throw std::invalid_argument("self-loop");
            if (e.weight <= 0.0)
                throw std::invalid_argument("edge weight must be positive");
        }

        // canonical edge ids: sorted by (source, target), parallels merged
        std::vector<Edge> sorted = edges;
        std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
            return std::make_pair(a.source, a.target) < std::make_pair(b.source, b.target);
        });
        std::size_t merged = 0;
        for (const Edge& e : sorted) {
            if (!g.edges_.empty() && g.edges_.back().source == e.source &&
                g.edges_.back().target == e.target) {
                g.edges_.back().weight += e.weight;
                ++merged;
            } else {
                g.edges_.push_back(e);
            }
        }
        if (merged_parallel) *merged_parallel = merged;

        g.out_.assign(node_count, {});
        g.in_.assign(node_count, {});
        for (EdgeId id = 0; id < g.edges_.size(); ++id) {
            g.out_[g.edges_[id].source].push_back(id);
            g.in_[g.edges_[id].target].push_back(id);
        }
        return g;
    }

    std::size_t num_nodes() const { return node_weight_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    double node_weight(NodeId v) const { return node_weight_[v]; }
    double exec_time(NodeId v) const { return exec_time_[v]; }
    double total_node_weight() const { return total_weight_; }

    const Edge& edge(EdgeId e) const { return edges_[e]; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::span<const EdgeId> out_edges(NodeId v) const { return out_[v]; }
    std::span<const EdgeId> in_edges(NodeId v) const { return in_[v]; }

    std::size_t out_degree(NodeId v) const { return out_[v].size(); }
    std::size_t in_degree(NodeId v) const { return in_[v].size(); }

    std::optional<EdgeId> find_edge(NodeId u, NodeId v) const {
        for (EdgeId e : out_[u])
            if (edges_[e].target == v) return e;
        return std::nullopt;
    }

    bool operator==(const DirectedGraph&) const = default;

private:
    std::vector<double> node_weight_;
    std::vector<double> exec_time_;
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> out_;
    std::vector<std::vector<EdgeId>> in_;
    double total_weight_ = 0.0;
};

/// Topological order plus its inverse (position[v] = index of v in order).
struct TopologicalOrder {
    std::vector<NodeId> order;
    std::vector<std::uint32_t> position;
};

namespace detail {

inline std::vector<std::uint32_t> in_degrees(const DirectedGraph& g) {
    std::vector<std::uint32_t> deg(g.num_nodes(), 0);
    for (const auto& e : g.edges()) ++deg[e.target];
    return deg;
}

} // namespace detail

/// Kahn peeling; true iff every node gets removed.
inline bool is_acyclic(const DirectedGraph& g) {
    auto deg = detail::in_degrees(g);
    std::vector<NodeId> stack;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (deg[v] == 0) stack.push_back(v);
    std::size_t removed = 0;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        ++removed;
        for (EdgeId e : g.out_edges(v)) {
            NodeId w = g.edge(e).target;
            if (--deg[w] == 0) stack.push_back(w);
        }
    }
    return removed == g.num_nodes();
}

/// Canonical topological order: among ready nodes the smallest id goes first.
inline TopologicalOrder topological_order(const DirectedGraph& g) {
    auto deg = detail::in_degrees(g);
    // min-heap keyed by node id keeps the result independent of edge layout
    std::priority_queue<NodeId, std::vector<NodeId>, std::greater<NodeId>> ready;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (deg[v] == 0) ready.push(v);
    TopologicalOrder topo;
    topo.order.reserve(g.num_nodes());
    while (!ready.empty()) {
        NodeId v = ready.top();
        ready.pop();
        topo.order.push_back(v);
        for (EdgeId e : g.out_edges(v)) {
            NodeId w = g.edge(e).target;
            if (--deg[w] == 0) ready.push(w);
        }
    }
    if (topo.order.size() != g.num_nodes())
        throw CycleError("graph contains a cycle");
    topo.position.assign(g.num_nodes(), 0);
    for (std::uint32_t i = 0; i < topo.order.size(); ++i)
        topo.position[topo.order[i]] = i;
    return topo;
}

/// Kahn construction with uniformly random tie-breaking among ready nodes.
/// Every topological order of the DAG has positive probability.
inline TopologicalOrder random_topological_order(const DirectedGraph& g, std::mt19937_64& rng) {
    auto deg = detail::in_degrees(g);
    std::vector<NodeId> ready;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (deg[v] == 0) ready.push_back(v);
    TopologicalOrder topo;
    topo.order.reserve(g.num_nodes());
    while (!ready.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
        std::size_t i = pick(rng);
        NodeId v = ready[i];
        ready[i] = ready.back();
        ready.pop_back();
        topo.order.push_back(v);
        for (EdgeId e : g.out_edges(v)) {
            NodeId w = g.edge(e).target;
            if (--deg[w] == 0) ready.push_back(w);
        }
    }
    if (topo.order.size() != g.num_nodes())
        throw CycleError("graph contains a cycle");
    topo.position.assign(g.num_nodes(), 0);
    for (std::uint32_t i = 0; i < topo.order.size(); ++i)
        topo.position[topo.order[i]] = i;
    return topo;
}

/// Quotient graph of a block assignment: one node per block (weight = block
/// load, exec time = summed exec times), one edge per ordered block pair that
/// carries at least one cut edge, with summed weight. Blocks may be empty;
/// they become isolated zero-weight quotient nodes so block ids and quotient
/// node ids coincide.
inline DirectedGraph build_quotient(const DirectedGraph& g,
                                    std::span<const std::uint32_t> block_of,
                                    std::uint32_t num_blocks) {
    assert(block_of.size() == g.num_nodes());
    std::vector<double> weight(num_blocks, 0.0);
    std::vector<double> exec(num_blocks, 0.0);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        assert(block_of[v] < num_blocks);
        weight[block_of[v]] += g.node_weight(v);
        exec[block_of[v]] += g.exec_time(v);
    }
    std::map<std::pair<NodeId, NodeId>, double> agg;
    for (const auto& e : g.edges()) {
        std::uint32_t a = block_of[e.source];
        std::uint32_t b = block_of[e.target];
        if (a != b) agg[{a, b}] += e.weight;
    }
    std::vector<DirectedGraph::Edge> edges;
    edges.reserve(agg.size());
    for (const auto& [pair, w] : agg)
        edges.push_back({pair.first, pair.second, w});
    return DirectedGraph::build(num_blocks, std::move(weight), std::move(exec), edges);
}

} // namespace dagp
