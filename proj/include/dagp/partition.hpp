#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dagp/edge_set.hpp"
#include "dagp/graph.hpp"

namespace dagp {

using BlockId = std::uint32_t;

/// Balance bound L_max = (1 + epsilon) * ceil(c(V) / k).
inline double load_bound(double total_weight, std::uint32_t k, double epsilon) {
    assert(k >= 1);
    return (1.0 + epsilon) * std::ceil(total_weight / k);
}

/// Compares a block load against the bound with a small relative slack, so an
/// exactly full block is never rejected over floating-point rounding of L_max.
inline bool load_fits(double load, double bound) {
    return load <= bound * (1.0 + 1e-9) + 1e-9;
}

/// Block assignment of every node plus cached loads, cut-edge set and cut
/// value. A value type: copying an individual copies its partition. Empty
/// blocks are well-formed; feasibility only bounds the maximum load.
class Partition {
public:
    Partition() = default;

    static Partition build(const DirectedGraph& g, std::vector<BlockId> block_of,
                           std::uint32_t k, double epsilon) {
        assert(block_of.size() == g.num_nodes());
        Partition p;
        p.k_ = k;
        p.epsilon_ = epsilon;
        p.block_of_ = std::move(block_of);
        p.block_load_.assign(k, 0.0);
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            if (p.block_of_[v] >= k) throw std::invalid_argument("block id out of range");
            p.block_load_[p.block_of_[v]] += g.node_weight(v);
        }
        p.cut_edges_ = EdgeSet(g.num_edges());
        p.cut_value_ = 0.0;
        for (EdgeId e = 0; e < g.num_edges(); ++e) {
            const auto& edge = g.edge(e);
            if (p.block_of_[edge.source] != p.block_of_[edge.target]) {
                p.cut_edges_.set(e);
                p.cut_value_ += edge.weight;
            }
        }
        return p;
    }

    std::uint32_t k() const { return k_; }
    double epsilon() const { return epsilon_; }

    BlockId block_of(NodeId v) const { return block_of_[v]; }
    const std::vector<BlockId>& blocks() const { return block_of_; }

    double block_load(BlockId b) const { return block_load_[b]; }
    const std::vector<double>& block_loads() const { return block_load_; }

    const EdgeSet& cut_edges() const { return cut_edges_; }
    double cut_value() const { return cut_value_; }

    /// Moves one node, updating loads, the cut-edge set and the cut value
    /// incrementally. Matches a full rebuild (fuzzed in the test suite).
    void move_node(const DirectedGraph& g, NodeId v, BlockId to) {
        assert(to < k_);
        BlockId from = block_of_[v];
        if (from == to) return;
        block_of_[v] = to;
        block_load_[from] -= g.node_weight(v);
        block_load_[to] += g.node_weight(v);
        for (EdgeId e : g.out_edges(v)) update_edge(g, e);
        for (EdgeId e : g.in_edges(v)) update_edge(g, e);
    }

    bool operator==(const Partition&) const = default;

private:
    void update_edge(const DirectedGraph& g, EdgeId e) {
        const auto& edge = g.edge(e);
        bool cut = block_of_[edge.source] != block_of_[edge.target];
        if (cut && !cut_edges_.test(e)) {
            cut_edges_.set(e);
            cut_value_ += edge.weight;
        } else if (!cut && cut_edges_.test(e)) {
            cut_edges_.reset(e);
            cut_value_ -= edge.weight;
        }
    }

    std::vector<BlockId> block_of_;
    std::uint32_t k_ = 0;
    double epsilon_ = 0.0;
    std::vector<double> block_load_;
    EdgeSet cut_edges_;
    double cut_value_ = 0.0;
};

/// Total weight of edges whose endpoints lie in different blocks, summed in
/// edge-id order (the same association the cached cut value uses).
inline double edge_cut(const DirectedGraph& g, const Partition& p) {
    double cut = 0.0;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        const auto& edge = g.edge(e);
        if (p.block_of(edge.source) != p.block_of(edge.target)) cut += edge.weight;
    }
    return cut;
}

inline DirectedGraph build_quotient(const DirectedGraph& g, const Partition& p) {
    return build_quotient(g, std::span<const BlockId>(p.blocks()), p.k());
}

struct FeasibilityReport {
    double l_max = 0.0;
    std::vector<BlockId> overloaded_blocks;
    bool quotient_acyclic = false;

    bool feasible() const { return overloaded_blocks.empty() && quotient_acyclic; }
};

/// Checks both constraints: every block load within L_max and the quotient
/// graph acyclic.
inline FeasibilityReport check_feasibility(const DirectedGraph& g, const Partition& p) {
    FeasibilityReport report;
    report.l_max = load_bound(g.total_node_weight(), p.k(), p.epsilon());
    for (BlockId b = 0; b < p.k(); ++b)
        if (!load_fits(p.block_load(b), report.l_max)) report.overloaded_blocks.push_back(b);
    report.quotient_acyclic = is_acyclic(build_quotient(g, p));
    return report;
}

/// Size of the symmetric difference of the cut-edge sets. A pseudometric on
/// partitions of one graph: both must share the edge universe.
inline std::size_t partition_distance(const Partition& a, const Partition& b) {
    if (a.cut_edges().universe() != b.cut_edges().universe())
        throw MismatchedGraph("partitions refer to different edge universes");
    return a.cut_edges().symmetric_difference_count(b.cut_edges());
}

} // namespace dagp
