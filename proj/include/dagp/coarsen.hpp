#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "dagp/edge_set.hpp"
#include "dagp/graph.hpp"
#include "dagp/partition.hpp"

namespace dagp {

/// Combined undirected weight between u and v. Antiparallel edges (which only
/// exist on coarse levels) contribute from both directions.
inline double undirected_pair_weight(const DirectedGraph& g, NodeId u, NodeId v) {
    double w = 0.0;
    if (auto e = g.find_edge(u, v)) w += g.edge(*e).weight;
    if (auto e = g.find_edge(v, u)) w += g.edge(*e).weight;
    return w;
}

/// expansion*2 rating: combined weight squared over the product of the node
/// weights. Zero weights count as one unit in the denominator only.
inline double rate_edge(const DirectedGraph& g, EdgeId e) {
    const auto& edge = g.edge(e);
    double w = undirected_pair_weight(g, edge.source, edge.target);
    double cu = std::max(g.node_weight(edge.source), 1.0);
    double cv = std::max(g.node_weight(edge.target), 1.0);
    return w * w / (cu * cv);
}

/// Node-disjoint set of matched pairs; partner[v] == kNoNode when unmatched.
struct Matching {
    std::vector<NodeId> partner;
    std::vector<std::pair<NodeId, NodeId>> pairs; // stored with first < second

    std::size_t num_pairs() const { return pairs.size(); }
};

namespace detail {

struct GpaPair {
    NodeId u, v;
    double rating;
    EdgeId rep; // smallest constituent edge id, the scan tie-breaker
};

// Max rating-sum selection of non-adjacent pairs along a path, classic
// interval DP with reconstruction. Prefers taking an edge on ties, which
// maximizes cardinality without changing the sum.
inline std::vector<std::size_t> dp_select_path(const std::vector<std::size_t>& seq,
                                               const std::vector<GpaPair>& pairs) {
    std::size_t l = seq.size();
    std::vector<double> best(l + 1, 0.0);
    for (std::size_t i = 1; i <= l; ++i) {
        double take = pairs[seq[i - 1]].rating + (i >= 2 ? best[i - 2] : 0.0);
        best[i] = std::max(best[i - 1], take);
    }
    std::vector<std::size_t> chosen;
    std::size_t i = l;
    while (i >= 1) {
        double take = pairs[seq[i - 1]].rating + (i >= 2 ? best[i - 2] : 0.0);
        if (take >= best[i - 1]) {
            chosen.push_back(seq[i - 1]);
            i = (i >= 2) ? i - 2 : 0;
        } else {
            --i;
        }
    }
    return chosen;
}

inline double seq_rating(const std::vector<std::size_t>& chosen, const std::vector<GpaPair>& pairs) {
    double sum = 0.0;
    for (std::size_t idx : chosen) sum += pairs[idx].rating;
    return sum;
}

} // namespace detail

/// Global Path Algorithm. Scans node pairs by decreasing rating (ties by the
/// smallest constituent edge id), grows a collection of paths and even cycles,
/// then selects an optimal matching per component by dynamic programming.
/// Pairs touching a blocked edge are not eligible.
inline Matching gpa_matching(const DirectedGraph& g, const EdgeSet& blocked) {
    assert(blocked.universe() == g.num_edges());
    std::size_t n = g.num_nodes();

    // undirected projection, dropping pairs with any blocked constituent
    std::vector<detail::GpaPair> pairs;
    {
        std::map<std::pair<NodeId, NodeId>, std::size_t> index;
        std::vector<bool> pair_blocked;
        for (EdgeId e = 0; e < g.num_edges(); ++e) {
            const auto& ed = g.edge(e);
            NodeId a = std::min(ed.source, ed.target);
            NodeId b = std::max(ed.source, ed.target);
            auto [it, inserted] = index.emplace(std::make_pair(a, b), pairs.size());
            if (inserted) {
                pairs.push_back({a, b, 0.0, e});
                pair_blocked.push_back(false);
            }
            auto& pi = pairs[it->second];
            pi.rep = std::min(pi.rep, e);
            if (blocked.test(e)) pair_blocked[it->second] = true;
        }
        std::size_t out = 0;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (!pair_blocked[i]) pairs[out++] = pairs[i];
        pairs.resize(out);
    }
    for (auto& pi : pairs) {
        double w = undirected_pair_weight(g, pi.u, pi.v);
        double cu = std::max(g.node_weight(pi.u), 1.0);
        double cv = std::max(g.node_weight(pi.v), 1.0);
        pi.rating = w * w / (cu * cv);
    }
    std::sort(pairs.begin(), pairs.end(), [](const detail::GpaPair& a, const detail::GpaPair& b) {
        if (a.rating != b.rating) return a.rating > b.rating;
        return a.rep < b.rep;
    });

    // grow paths and even cycles: a pair applies only between path endpoints
    std::vector<int> deg(n, 0);
    std::vector<NodeId> parent(n);
    for (NodeId v = 0; v < n; ++v) parent[v] = v;
    std::vector<std::uint32_t> comp_edges(n, 0);
    std::vector<bool> comp_cycle(n, false);
    auto find = [&](NodeId v) {
        while (parent[v] != v) {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        return v;
    };

    struct Arm {
        NodeId to;
        std::size_t pair_idx;
    };
    std::vector<std::vector<Arm>> adj(n);

    for (std::size_t idx = 0; idx < pairs.size(); ++idx) {
        NodeId u = pairs[idx].u, v = pairs[idx].v;
        if (deg[u] >= 2 || deg[v] >= 2) continue;
        NodeId ru = find(u), rv = find(v);
        if (ru == rv) {
            // u and v are the two endpoints of one path; only an even cycle
            // (odd number of path edges) may be closed
            if (comp_cycle[ru] || comp_edges[ru] % 2 == 0) continue;
            comp_cycle[ru] = true;
            ++comp_edges[ru];
        } else {
            parent[ru] = rv;
            comp_edges[rv] += comp_edges[ru] + 1;
        }
        ++deg[u];
        ++deg[v];
        adj[u].push_back({v, idx});
        adj[v].push_back({u, idx});
    }

    // per-component optimal selection
    Matching m;
    m.partner.assign(n, kNoNode);
    auto take = [&](std::size_t idx) {
        NodeId u = pairs[idx].u, v = pairs[idx].v;
        assert(m.partner[u] == kNoNode && m.partner[v] == kNoNode);
        m.partner[u] = v;
        m.partner[v] = u;
        m.pairs.emplace_back(u, v);
    };

    std::vector<bool> visited(n, false);
    auto walk = [&](NodeId start, std::size_t first_pair) {
        std::vector<std::size_t> seq;
        NodeId cur = start;
        std::size_t in_pair = first_pair;
        visited[cur] = true;
        while (true) {
            std::size_t next_pair = SIZE_MAX;
            NodeId next_node = kNoNode;
            for (const Arm& arm : adj[cur]) {
                if (arm.pair_idx != in_pair) {
                    next_pair = arm.pair_idx;
                    next_node = arm.to;
                    break;
                }
            }
            if (next_pair == SIZE_MAX || visited[next_node]) break;
            seq.push_back(next_pair);
            cur = next_node;
            in_pair = next_pair;
            visited[cur] = true;
        }
        return seq;
    };

    for (NodeId s = 0; s < n; ++s) {
        if (visited[s] || deg[s] != 1 || comp_cycle[find(s)]) continue;
        auto seq = walk(s, SIZE_MAX);
        for (std::size_t idx : detail::dp_select_path(seq, pairs)) take(idx);
    }
    for (NodeId s = 0; s < n; ++s) {
        if (visited[s] || deg[s] == 0) continue;
        assert(deg[s] == 2 && comp_cycle[find(s)]);
        // walk stops one pair short of closing; the missing pair is the one
        // connecting the last node back to s
        auto seq = walk(s, SIZE_MAX);
        std::size_t closing = SIZE_MAX;
        for (const Arm& arm : adj[s])
            if (std::find(seq.begin(), seq.end(), arm.pair_idx) == seq.end()) closing = arm.pair_idx;
        assert(closing != SIZE_MAX);
        seq.push_back(closing);
        assert(seq.size() % 2 == 0);
        // drop one extremal edge, keep the better DP result
        std::vector<std::size_t> without_last(seq.begin(), seq.end() - 1);
        std::vector<std::size_t> without_first(seq.begin() + 1, seq.end());
        auto a = detail::dp_select_path(without_last, pairs);
        auto b = detail::dp_select_path(without_first, pairs);
        const auto& chosen = detail::seq_rating(a, pairs) >= detail::seq_rating(b, pairs) ? a : b;
        for (std::size_t idx : chosen) take(idx);
    }
    return m;
}

/// One coarsening step: the coarse graph, the fine-to-coarse node map and the
/// matching that produced it.
struct HierarchyLevel {
    DirectedGraph coarse_graph;
    std::vector<NodeId> fine_to_coarse;
    Matching matching;
};

/// Contracts every matched pair into one coarse node (weights and exec times
/// add up), merges parallel directed edges per direction and drops edges
/// internal to a pair. Coarse ids follow fine id order.
inline HierarchyLevel contract(const DirectedGraph& g, Matching m) {
    std::size_t n = g.num_nodes();
    std::vector<NodeId> map(n, kNoNode);
    std::vector<double> weight, exec;
    NodeId next = 0;
    for (NodeId v = 0; v < n; ++v) {
        NodeId p = m.partner[v];
        if (p != kNoNode && p < v) continue;
        map[v] = next;
        double cw = g.node_weight(v), ce = g.exec_time(v);
        if (p != kNoNode) {
            map[p] = next;
            cw += g.node_weight(p);
            ce += g.exec_time(p);
        }
        weight.push_back(cw);
        exec.push_back(ce);
        ++next;
    }
    std::map<std::pair<NodeId, NodeId>, double> agg;
    for (const auto& e : g.edges()) {
        NodeId a = map[e.source], b = map[e.target];
        if (a != b) agg[{a, b}] += e.weight;
    }
    std::vector<DirectedGraph::Edge> edges;
    edges.reserve(agg.size());
    for (const auto& [key, w] : agg) edges.push_back({key.first, key.second, w});
    return {DirectedGraph::build(next, std::move(weight), std::move(exec), edges),
            std::move(map), std::move(m)};
}

/// Match-and-contract until no matchable edge is left. Blocked edges are never
/// matched; a coarse edge is blocked iff it merges at least one blocked fine
/// edge, so a blocked crossing survives to the coarsest level.
inline std::vector<HierarchyLevel> coarsen_to_bottom(const DirectedGraph& g,
                                                     const EdgeSet& blocked) {
    std::vector<HierarchyLevel> levels;
    EdgeSet cur_blocked = blocked;
    const DirectedGraph* cur = &g;
    while (true) {
        Matching m = gpa_matching(*cur, cur_blocked);
        if (m.num_pairs() == 0) break;
        HierarchyLevel level = contract(*cur, std::move(m));
        EdgeSet next_blocked(level.coarse_graph.num_edges());
        cur_blocked.for_each([&](std::size_t e) {
            const auto& ed = cur->edge(static_cast<EdgeId>(e));
            NodeId a = level.fine_to_coarse[ed.source];
            NodeId b = level.fine_to_coarse[ed.target];
            assert(a != b); // blocked pairs are ineligible, so never contracted
            auto ce = level.coarse_graph.find_edge(a, b);
            assert(ce.has_value());
            next_blocked.set(*ce);
        });
        levels.push_back(std::move(level));
        cur = &levels.back().coarse_graph;
        cur_blocked = std::move(next_blocked);
    }
    return levels;
}

/// Carries a partition of the finest graph down to the coarsest level. Every
/// contracted pair must be block-internal, which holds whenever the blocked
/// set used for coarsening contained the partition's cut edges.
inline Partition transfer_to_coarsest(const DirectedGraph& g,
                                      const std::vector<HierarchyLevel>& levels,
                                      const Partition& finest) {
    if (levels.empty()) return finest;
    std::vector<NodeId> map(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) map[v] = v;
    for (const auto& level : levels)
        for (NodeId v = 0; v < g.num_nodes(); ++v) map[v] = level.fine_to_coarse[map[v]];

    const DirectedGraph& coarsest = levels.back().coarse_graph;
    std::vector<BlockId> block(coarsest.num_nodes(), kNoNode);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        BlockId b = finest.block_of(v);
        assert(block[map[v]] == kNoNode || block[map[v]] == b);
        block[map[v]] = b;
    }
    return Partition::build(coarsest, std::move(block), finest.k(), finest.epsilon());
}

/// Projects a coarse partition one level up: each fine node inherits the block
/// of its coarse node. Cut value, loads and quotient are preserved.
inline Partition project_partition(const DirectedGraph& fine_graph, const HierarchyLevel& level,
                                   const Partition& coarse_p) {
    assert(level.fine_to_coarse.size() == fine_graph.num_nodes());
    std::vector<BlockId> blocks(fine_graph.num_nodes());
    for (NodeId v = 0; v < fine_graph.num_nodes(); ++v)
        blocks[v] = coarse_p.block_of(level.fine_to_coarse[v]);
    return Partition::build(fine_graph, std::move(blocks), coarse_p.k(), coarse_p.epsilon());
}

} // namespace dagp
