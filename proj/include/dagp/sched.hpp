#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <queue>
#include <vector>

#include "dagp/errors.hpp"
#include "dagp/graph.hpp"
#include "dagp/multilevel.hpp"
#include "dagp/partition.hpp"

namespace dagp {

/// Fitness-side cost model: each block forms one gang, each node one program,
/// and a gang's time is dominated by its longest program. Returns the sum of
/// per-block maxima of exec_time.
inline double critical_path_estimate(const DirectedGraph& g, const Partition& p) {
    std::vector<double> longest(p.k(), 0.0);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        BlockId b = p.block_of(v);
        longest[b] = std::max(longest[b], g.exec_time(v));
    }
    double total = 0.0;
    for (double t : longest) total += t;
    return total;
}

/// Single appearance list scheduler. `gang` holds one node per program with
/// exec_time annotations and the intra-gang dependency edges. Priority is the
/// longest exec-time path from a program to any sink, inclusive; ties go to
/// the smaller program id. Returns the makespan.
inline double sas_list_schedule(const DirectedGraph& gang, std::uint32_t processors) {
    assert(processors >= 1);
    const NodeId n = gang.num_nodes();
    if (n == 0) return 0.0;

    TopologicalOrder topo = topological_order(gang); // CycleError if cyclic
    std::vector<double> priority(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        NodeId v = topo.order[i];
        double best_succ = 0.0;
        for (EdgeId e : gang.out_edges(v))
            best_succ = std::max(best_succ, priority[gang.edge(e).target]);
        priority[v] = gang.exec_time(v) + best_succ;
    }

    auto higher = [&](NodeId a, NodeId b) {
        // inverted for a max-heap: true when a is the worse choice
        if (priority[a] != priority[b]) return priority[a] < priority[b];
        return a > b;
    };
    std::priority_queue<NodeId, std::vector<NodeId>, decltype(higher)> ready(higher);
    std::vector<std::uint32_t> pending = detail::in_degrees(gang);
    for (NodeId v = 0; v < n; ++v)
        if (pending[v] == 0) ready.push(v);

    using Running = std::pair<double, NodeId>; // finish time, program
    std::priority_queue<Running, std::vector<Running>, std::greater<>> running;
    double now = 0.0;
    double makespan = 0.0;
    std::uint32_t free_procs = processors;
    NodeId done = 0;
    while (done < n) {
        while (free_procs > 0 && !ready.empty()) {
            NodeId v = ready.top();
            ready.pop();
            running.emplace(now + gang.exec_time(v), v);
            --free_procs;
        }
        assert(!running.empty());
        auto [finish, v] = running.top();
        running.pop();
        now = finish;
        makespan = std::max(makespan, finish);
        ++free_procs;
        ++done;
        for (EdgeId e : gang.out_edges(v)) {
            NodeId t = gang.edge(e).target;
            if (--pending[t] == 0) ready.push(t);
        }
        // drain everything else finishing at the same instant before refilling
        while (!running.empty() && running.top().first == now) {
            auto [f2, v2] = running.top();
            running.pop();
            ++free_procs;
            ++done;
            for (EdgeId e : gang.out_edges(v2)) {
                NodeId t = gang.edge(e).target;
                if (--pending[t] == 0) ready.push(t);
            }
        }
    }
    return makespan;
}

/// One partitioned graph turned into an executable shape: programs grouped
/// into gangs, gangs ordered by a topological order of the quotient graph.
struct GangPlan {
    std::vector<std::vector<std::uint32_t>> gangs; // program ids per gang
    std::vector<std::uint32_t> program_of;         // node -> program
    std::vector<double> program_exec;              // program -> summed exec time
};

/// Single-pass plan: every node is its own program, every block one gang.
inline GangPlan make_gang_plan(const DirectedGraph& g, const Partition& p) {
    DirectedGraph quotient = build_quotient(g, p);
    TopologicalOrder order = topological_order(quotient); // CycleError if infeasible

    GangPlan plan;
    plan.program_of.resize(g.num_nodes());
    plan.program_exec.resize(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        plan.program_of[v] = v;
        plan.program_exec[v] = g.exec_time(v);
    }
    plan.gangs.resize(p.k());
    for (std::size_t i = 0; i < order.order.size(); ++i) {
        BlockId b = order.order[i];
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            if (p.block_of(v) == b) plan.gangs[i].push_back(v);
    }
    return plan;
}

/// Two-pass driver: first group nodes into programs (memory-bound pass), then
/// partition the program-level quotient graph into gangs. The returned plan
/// maps original nodes through their program into the gang order.
inline GangPlan two_pass_plan(const DirectedGraph& g, const PipelineConfig& program_cfg,
                              const PipelineConfig& gang_cfg, std::mt19937_64& rng) {
    Partition programs = multilevel_partition(g, program_cfg, rng);
    DirectedGraph program_graph = build_quotient(g, programs);
    Partition gangs = multilevel_partition(program_graph, gang_cfg, rng);
    DirectedGraph gang_quotient = build_quotient(program_graph, gangs);
    TopologicalOrder order = topological_order(gang_quotient);

    GangPlan plan;
    plan.program_of.resize(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) plan.program_of[v] = programs.block_of(v);
    plan.program_exec.resize(program_graph.num_nodes());
    for (NodeId q = 0; q < program_graph.num_nodes(); ++q)
        plan.program_exec[q] = program_graph.exec_time(q);
    plan.gangs.resize(gangs.k());
    for (std::size_t i = 0; i < order.order.size(); ++i) {
        BlockId b = order.order[i];
        for (NodeId q = 0; q < program_graph.num_nodes(); ++q)
            if (gangs.block_of(q) == b) plan.gangs[i].push_back(q);
    }
    return plan;
}

/// Per-gang makespans under SAS on the intra-gang dependency subgraph of
/// `program_graph` (programs outside the gang and crossing edges drop out).
inline std::vector<double> gang_makespans(const GangPlan& plan,
                                          const DirectedGraph& program_graph,
                                          std::uint32_t processors) {
    std::vector<double> result;
    result.reserve(plan.gangs.size());
    std::vector<NodeId> local(program_graph.num_nodes(), kNoNode);
    for (const auto& gang : plan.gangs) {
        for (std::size_t i = 0; i < gang.size(); ++i) local[gang[i]] = static_cast<NodeId>(i);
        std::vector<double> weights(gang.size(), 1.0);
        std::vector<double> exec(gang.size());
        for (std::size_t i = 0; i < gang.size(); ++i) exec[i] = program_graph.exec_time(gang[i]);
        std::vector<DirectedGraph::Edge> edges;
        for (std::uint32_t q : gang)
            for (EdgeId e : program_graph.out_edges(q)) {
                NodeId t = program_graph.edge(e).target;
                if (local[t] != kNoNode) edges.push_back({local[q], local[t], 1.0});
            }
        auto sub = DirectedGraph::build(static_cast<NodeId>(gang.size()), weights, exec, edges);
        result.push_back(sas_list_schedule(sub, processors));
        for (std::uint32_t q : gang) local[q] = kNoNode;
    }
    return result;
}

} // namespace dagp
