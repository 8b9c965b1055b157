#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "dagp/coarsen.hpp"
#include "dagp/errors.hpp"
#include "dagp/graph.hpp"
#include "dagp/partition.hpp"
#include "dagp/refine.hpp"

namespace dagp {

struct PipelineConfig {
    std::uint32_t k = 2;
    double epsilon = 0.03;
    std::uint64_t seed = 1;
    std::uint32_t repetitions = 4;
    LocalSearch local_search = LocalSearch::Any;
};

/// Draws a random topological order and splits it into k consecutive blocks.
/// Blocks are filled greedily toward the unscaled average ceil(c(V)/k) so the
/// suffix keeps slack; a block is only closed while the remaining nodes still
/// fit into the remaining blocks, which may force filling up to L_max instead.
/// The quotient is acyclic by construction.
inline Partition initial_partition(const DirectedGraph& g, std::uint32_t k, double epsilon,
                                   std::mt19937_64& rng) {
    if (k < 1) throw InfeasibleSplit("k must be at least 1");
    const double total = g.total_node_weight();
    const double target = std::ceil(total / k);
    const double lmax = load_bound(total, k, epsilon);

    auto topo = random_topological_order(g, rng);
    const std::size_t n = topo.order.size();
    std::vector<double> remaining(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;)
        remaining[i] = remaining[i + 1] + g.node_weight(topo.order[i]);

    std::vector<BlockId> blocks(g.num_nodes(), 0);
    BlockId cur = 0;
    double load = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        NodeId v = topo.order[i];
        double w = g.node_weight(v);
        while (load + w > target && cur + 1 < k &&
               remaining[i] <= static_cast<double>(k - 1 - cur) * lmax) {
            ++cur;
            load = 0.0;
        }
        if (!load_fits(load + w, lmax))
            throw InfeasibleSplit("no consecutive split satisfies the balance constraint");
        blocks[v] = cur;
        load += w;
    }
    return Partition::build(g, std::move(blocks), k, epsilon);
}

/// Best-of-repetitions driver: each repetition draws a fresh initial partition
/// and improves it with one local search pass. InfeasibleSplit propagates only
/// when every repetition fails.
inline Partition single_level_partition(const DirectedGraph& g, const PipelineConfig& cfg,
                                        std::mt19937_64& rng) {
    std::optional<Partition> best;
    std::uint32_t failures = 0;
    for (std::uint32_t rep = 0; rep < cfg.repetitions; ++rep) {
        std::optional<Partition> p;
        try {
            p = initial_partition(g, cfg.k, cfg.epsilon, rng);
        } catch (const InfeasibleSplit&) {
            ++failures;
            continue;
        }
        Partition refined = run_local_search(cfg.local_search, g, *p, rng);
        if (!best || refined.cut_value() < best->cut_value()) best = std::move(refined);
    }
    if (!best) {
        assert(failures == cfg.repetitions);
        throw InfeasibleSplit("all repetitions failed to split the graph");
    }
    return *best;
}

inline Partition single_level_partition(const DirectedGraph& g, const PipelineConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return single_level_partition(g, cfg, rng);
}

/// The inverted V-cycle core: coarsen with `blocked` edges kept uncontracted,
/// carry `start` down to the coarsest graph, then refine on every level on the
/// way back up. `blocked` must contain all of start's cut edges. One heuristic
/// is used for the whole cycle; LocalSearch::Any is resolved once at entry.
inline Partition multilevel_refine(const DirectedGraph& g, const Partition& start,
                                   const EdgeSet& blocked, LocalSearch choice,
                                   std::mt19937_64& rng) {
    assert(blocked.universe() == g.num_edges());
    choice = sample_local_search(choice, rng);

    auto levels = coarsen_to_bottom(g, blocked);
    Partition p = transfer_to_coarsest(g, levels, start);
    p = run_local_search(choice, levels.empty() ? g : levels.back().coarse_graph, p, rng);
    for (std::size_t i = levels.size(); i-- > 0;) {
        const DirectedGraph& fine = i == 0 ? g : levels[i - 1].coarse_graph;
        p = project_partition(fine, levels[i], p);
        p = run_local_search(choice, fine, p, rng);
    }
    assert(p.cut_value() <= start.cut_value());
    return p;
}

/// Full multi-level algorithm: build (or accept) a finest-level partition,
/// block its cut edges, and run the V-cycle.
inline Partition multilevel_partition(const DirectedGraph& g, const PipelineConfig& cfg,
                                      std::mt19937_64& rng,
                                      const std::optional<Partition>& seed_partition = {}) {
    Partition start =
        seed_partition ? *seed_partition : single_level_partition(g, cfg, rng);
    return multilevel_refine(g, start, start.cut_edges(), cfg.local_search, rng);
}

inline Partition multilevel_partition(const DirectedGraph& g, const PipelineConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return multilevel_partition(g, cfg, rng);
}

} // namespace dagp
