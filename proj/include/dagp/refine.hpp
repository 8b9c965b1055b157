#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <utility>
#include <vector>

#include "dagp/graph.hpp"
#include "dagp/partition.hpp"

namespace dagp {

/// A single-node move together with its gain (cut decrease, positive is an
/// improvement). Only produced for moves that keep the quotient acyclic and
/// the target block within L_max.
struct MoveCandidate {
    NodeId node;
    BlockId from_block;
    BlockId to_block;
    double gain;
};

/// Permutation of block ids under which every quotient edge points forward.
/// Exists iff the quotient graph is acyclic.
struct BlockOrder {
    std::vector<BlockId> order;           // position -> block id
    std::vector<std::uint32_t> position;  // block id -> position
};

/// Observer for committed refinement moves; used by the validation suite to
/// audit every move against the exact acyclicity oracle.
using MoveHook = std::function<void(NodeId, BlockId, BlockId, const Partition&)>;

namespace detail {

/// Cut-edge multiplicities between block pairs, maintained incrementally under
/// single-node moves. Counts are integers, so no floating-point residue can
/// fake or hide a quotient edge.
class QuotientCounts {
public:
    QuotientCounts(const DirectedGraph& g, const Partition& p)
        : k_(p.k()), cnt_(static_cast<std::size_t>(k_) * k_, 0) {
        for (const auto& e : g.edges()) {
            BlockId a = p.block_of(e.source), b = p.block_of(e.target);
            if (a != b) ++cnt_[idx(a, b)];
        }
    }

    /// Adjusts counts for moving v from `from` to `to`. Call with the
    /// partition still holding every *other* node's current block; v's own
    /// entry is never read.
    void apply_move(const DirectedGraph& g, const Partition& p, NodeId v, BlockId from,
                    BlockId to) {
        for (EdgeId e : g.out_edges(v)) {
            BlockId x = p.block_of(g.edge(e).target);
            if (x != from) --cnt_[idx(from, x)];
            if (x != to) ++cnt_[idx(to, x)];
        }
        for (EdgeId e : g.in_edges(v)) {
            BlockId x = p.block_of(g.edge(e).source);
            if (x != from) --cnt_[idx(x, from)];
            if (x != to) ++cnt_[idx(x, to)];
        }
    }

    bool acyclic() const {
        std::vector<std::uint32_t> indeg(k_, 0);
        for (BlockId a = 0; a < k_; ++a)
            for (BlockId b = 0; b < k_; ++b)
                if (cnt_[idx(a, b)] > 0) ++indeg[b];
        std::vector<BlockId> stack;
        for (BlockId v = 0; v < k_; ++v)
            if (indeg[v] == 0) stack.push_back(v);
        std::uint32_t removed = 0;
        while (!stack.empty()) {
            BlockId v = stack.back();
            stack.pop_back();
            ++removed;
            for (BlockId b = 0; b < k_; ++b)
                if (cnt_[idx(v, b)] > 0 && --indeg[b] == 0) stack.push_back(b);
        }
        return removed == k_;
    }

    /// Tentative Kahn test: would moving v keep the quotient acyclic?
    bool acyclic_after(const DirectedGraph& g, const Partition& p, NodeId v, BlockId from,
                       BlockId to) {
        apply_move(g, p, v, from, to);
        bool ok = acyclic();
        apply_move(g, p, v, to, from);
        return ok;
    }

    /// Canonical forward order of the blocks (smallest block id first among
    /// ready blocks). Throws CycleError if the quotient is cyclic.
    BlockOrder block_order() const {
        std::vector<std::uint32_t> indeg(k_, 0);
        for (BlockId a = 0; a < k_; ++a)
            for (BlockId b = 0; b < k_; ++b)
                if (cnt_[idx(a, b)] > 0) ++indeg[b];
        std::priority_queue<BlockId, std::vector<BlockId>, std::greater<BlockId>> ready;
        for (BlockId v = 0; v < k_; ++v)
            if (indeg[v] == 0) ready.push(v);
        BlockOrder order;
        order.order.reserve(k_);
        while (!ready.empty()) {
            BlockId v = ready.top();
            ready.pop();
            order.order.push_back(v);
            for (BlockId b = 0; b < k_; ++b)
                if (cnt_[idx(v, b)] > 0 && --indeg[b] == 0) ready.push(b);
        }
        if (order.order.size() != k_) throw CycleError("quotient graph contains a cycle");
        order.position.assign(k_, 0);
        for (std::uint32_t i = 0; i < k_; ++i) order.position[order.order[i]] = i;
        return order;
    }

private:
    std::size_t idx(BlockId a, BlockId b) const {
        return static_cast<std::size_t>(a) * k_ + b;
    }

    std::uint32_t k_;
    std::vector<std::int32_t> cnt_;
};

} // namespace detail

/// Positions (inclusive) in the block order that node v may move to without
/// turning a quotient edge backward: A = max predecessor-block position,
/// B = min successor-block position. A predecessor or successor inside v's own
/// block clamps the corresponding end to the block itself.
struct PositionInterval {
    std::uint32_t lo;
    std::uint32_t hi;
};

inline PositionInterval movable_interval(const DirectedGraph& g, const Partition& p,
                                         const BlockOrder& order, NodeId v) {
    PositionInterval iv{0, p.k() - 1};
    [[maybe_unused]] std::uint32_t own = order.position[p.block_of(v)];
    for (EdgeId e : g.in_edges(v)) {
        std::uint32_t pos = order.position[p.block_of(g.edge(e).source)];
        assert(pos <= own); // predecessors sit in earlier-ordered blocks
        iv.lo = std::max(iv.lo, pos);
    }
    for (EdgeId e : g.out_edges(v)) {
        std::uint32_t pos = order.position[p.block_of(g.edge(e).target)];
        assert(pos >= own);
        iv.hi = std::min(iv.hi, pos);
    }
    return iv;
}

namespace detail {

// Shared h1/h2 loop: collect every admitted positive-gain move, apply the
// best one (ties uniformly at random), repeat until fixpoint. h2 additionally
// admits moves the interval condition vetoes when a tentative Kahn check on
// the updated quotient passes.
inline Partition hill_climb(const DirectedGraph& g, Partition p, std::mt19937_64& rng,
                            bool exact_fallback, const MoveHook& hook) {
    const std::uint32_t k = p.k();
    if (k <= 1 || g.num_nodes() == 0) return p;
    const double l_max = load_bound(g.total_node_weight(), k, p.epsilon());

    QuotientCounts qc(g, p);
    assert(qc.acyclic());
    std::vector<double> wsum(k, 0.0);
    std::vector<BlockId> touched;
    std::vector<MoveCandidate> best;

    while (true) {
        BlockOrder order = qc.block_order();
        double best_gain = 0.0;
        best.clear();

        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            BlockId from = p.block_of(v);
            std::uint32_t lo = 0, hi = k - 1;
            touched.clear();
            auto touch = [&](BlockId bl, double w) {
                if (wsum[bl] == 0.0) touched.push_back(bl);
                wsum[bl] += w;
            };
            for (EdgeId e : g.out_edges(v)) {
                const auto& ed = g.edge(e);
                BlockId bl = p.block_of(ed.target);
                touch(bl, ed.weight);
                hi = std::min(hi, order.position[bl]);
            }
            for (EdgeId e : g.in_edges(v)) {
                const auto& ed = g.edge(e);
                BlockId bl = p.block_of(ed.source);
                touch(bl, ed.weight);
                lo = std::max(lo, order.position[bl]);
            }
            double internal = wsum[from];

            for (BlockId bl : touched) {
                if (bl == from) continue;
                double gain = wsum[bl] - internal;
                if (gain <= 0.0) continue;
                if (gain < best_gain) continue;
                if (!load_fits(p.block_load(bl) + g.node_weight(v), l_max)) continue;
                std::uint32_t pos = order.position[bl];
                if (pos < lo || pos > hi) {
                    if (!exact_fallback) continue;
                    if (!qc.acyclic_after(g, p, v, from, bl)) continue;
                }
                if (gain > best_gain) {
                    best_gain = gain;
                    best.clear();
                }
                best.push_back({v, from, bl, gain});
            }
            for (BlockId bl : touched) wsum[bl] = 0.0;
        }

        if (best.empty()) break;
        std::size_t pick = 0;
        if (best.size() > 1)
            pick = std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng);
        const MoveCandidate& mv = best[pick];
        qc.apply_move(g, p, mv.node, mv.from_block, mv.to_block);
        p.move_node(g, mv.node, mv.to_block);
        assert(qc.acyclic());
        if (hook) hook(mv.node, mv.from_block, mv.to_block, p);
    }
    return p;
}

// One FM pass restricted to the block pair (a, b). Returns true iff the
// committed (post-rollback) prefix is nonempty.
inline bool fm_inner_pass(const DirectedGraph& g, Partition& p, BlockId a, BlockId b,
                          double l_max, std::size_t budget, const MoveHook& hook) {
    QuotientCounts qc(g, p);
    assert(qc.acyclic());
    // the order stays a valid witness for every move the interval condition
    // admits, so it is computed once per pass
    BlockOrder order = qc.block_order();

    auto gain_of = [&](NodeId v, BlockId from, BlockId to) {
        double toward = 0.0, internal = 0.0;
        for (EdgeId e : g.out_edges(v)) {
            const auto& ed = g.edge(e);
            BlockId x = p.block_of(ed.target);
            if (x == to)
                toward += ed.weight;
            else if (x == from)
                internal += ed.weight;
        }
        for (EdgeId e : g.in_edges(v)) {
            const auto& ed = g.edge(e);
            BlockId x = p.block_of(ed.source);
            if (x == to)
                toward += ed.weight;
            else if (x == from)
                internal += ed.weight;
        }
        return toward - internal;
    };
    auto movable = [&](NodeId v, BlockId to) {
        auto iv = movable_interval(g, p, order, v);
        std::uint32_t pos = order.position[to];
        return pos >= iv.lo && pos <= iv.hi;
    };

    std::priority_queue<std::pair<double, NodeId>> pq;
    std::vector<double> cur_gain(g.num_nodes(), 0.0);
    std::vector<char> locked(g.num_nodes(), 0);

    auto push_if_movable = [&](NodeId v) {
        if (locked[v]) return;
        BlockId from = p.block_of(v);
        if (from != a && from != b) return;
        BlockId to = from == a ? b : a;
        if (!movable(v, to)) return; // immovable nodes stay out; stale entries skip lazily
        cur_gain[v] = gain_of(v, from, to);
        pq.push({cur_gain[v], v});
    };
    for (NodeId v = 0; v < g.num_nodes(); ++v) push_if_movable(v);

    struct Step {
        NodeId v;
        BlockId from, to;
    };
    std::vector<Step> steps;
    double best_cut = p.cut_value();
    std::size_t best_len = 0, non_improving = 0;

    while (!pq.empty()) {
        auto [gain, v] = pq.top();
        pq.pop();
        if (locked[v]) continue;
        if (gain != cur_gain[v]) continue; // superseded by a fresher entry
        BlockId from = p.block_of(v);
        BlockId to = from == a ? b : a;
        if (!movable(v, to)) continue; // lazily locked: movability was lost
        if (!load_fits(p.block_load(to) + g.node_weight(v), l_max)) continue;

        qc.apply_move(g, p, v, from, to);
        p.move_node(g, v, to);
        locked[v] = 1; // at most one move per node and pass
        steps.push_back({v, from, to});
        assert(qc.acyclic());
        if (hook) hook(v, from, to, p);

        if (p.cut_value() < best_cut) {
            best_cut = p.cut_value();
            best_len = steps.size();
            non_improving = 0;
        } else if (++non_improving >= budget) {
            break;
        }
        for (EdgeId e : g.out_edges(v)) push_if_movable(g.edge(e).target);
        for (EdgeId e : g.in_edges(v)) push_if_movable(g.edge(e).source);
    }

    while (steps.size() > best_len) {
        const Step& s = steps.back();
        p.move_node(g, s.v, s.from);
        steps.pop_back();
    }
    return best_len > 0;
}

} // namespace detail

/// Highest-gain hill climbing under the movable-interval sufficient condition.
/// O(m) per sweep; stops when no positive-gain admitted move remains.
inline Partition refine_h1(const DirectedGraph& g, Partition p, std::mt19937_64& rng,
                           const MoveHook& hook = {}) {
    return detail::hill_climb(g, std::move(p), rng, false, hook);
}

/// Like h1, but a move vetoed by the sufficient condition gets an exact
/// tentative Kahn test on the updated quotient graph. Admits a superset of
/// h1's moves at O(km) cost.
inline Partition refine_h2(const DirectedGraph& g, Partition p, std::mt19937_64& rng,
                           const MoveHook& hook = {}) {
    return detail::hill_climb(g, std::move(p), rng, true, hook);
}

/// Pairwise adapted Fiduccia-Mattheyses. Random pair order per round, at least
/// one block of each processed pair active, inner passes with priority-queue
/// gains, a 2n/k consecutive-non-improving-move budget, rollback to the best
/// prefix, and pair reactivation only on productive passes.
inline Partition refine_h3_fm(const DirectedGraph& g, Partition p, std::mt19937_64& rng,
                              const MoveHook& hook = {}) {
    const std::uint32_t k = p.k();
    if (k <= 1 || g.num_nodes() < 2) return p;
    const double l_max = load_bound(g.total_node_weight(), k, p.epsilon());
    const std::size_t budget = std::max<std::size_t>(1, 2 * g.num_nodes() / k);

    std::vector<char> active(k, 1);
    std::vector<std::pair<BlockId, BlockId>> pairs;
    while (true) {
        pairs.clear();
        for (BlockId a = 0; a < k; ++a)
            for (BlockId b = a + 1; b < k; ++b)
                if (active[a] || active[b]) pairs.emplace_back(a, b);
        if (pairs.empty()) break;
        std::fill(active.begin(), active.end(), 0);
        std::shuffle(pairs.begin(), pairs.end(), rng);

        bool any = false;
        for (auto [a, b] : pairs) {
            if (detail::fm_inner_pass(g, p, a, b, l_max, budget, hook)) {
                active[a] = active[b] = 1;
                any = true;
            }
        }
        if (!any) break;
    }
    return p;
}

/// Which local search a pipeline invocation runs. `Any` resolves to one of the
/// three concrete heuristics uniformly at random, once per invocation.
enum class LocalSearch { H1, H2, H3, Any };

inline LocalSearch sample_local_search(LocalSearch choice, std::mt19937_64& rng) {
    if (choice != LocalSearch::Any) return choice;
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: return LocalSearch::H1;
        case 1: return LocalSearch::H2;
        default: return LocalSearch::H3;
    }
}

inline Partition run_local_search(LocalSearch choice, const DirectedGraph& g, Partition p,
                                  std::mt19937_64& rng, const MoveHook& hook = {}) {
    switch (sample_local_search(choice, rng)) {
        case LocalSearch::H1: return refine_h1(g, std::move(p), rng, hook);
        case LocalSearch::H2: return refine_h2(g, std::move(p), rng, hook);
        default: return refine_h3_fm(g, std::move(p), rng, hook);
    }
}

} // namespace dagp
