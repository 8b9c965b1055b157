#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "dagp/errors.hpp"
#include "dagp/graph.hpp"
#include "dagp/multilevel.hpp"
#include "dagp/partition.hpp"
#include "dagp/sched.hpp"

namespace dagp {

inline double fitness(const DirectedGraph& g, const Partition& p, double alpha, double beta) {
    double f = alpha * p.cut_value();
    if (beta != 0.0) f += beta * critical_path_estimate(g, p);
    return f;
}

struct Individual {
    Partition partition;
    double cut = 0.0;
    double fitness = 0.0;
    double creation_time = 0.0; // seconds since run start (virtual under a generation cap)
};

struct EvoConfig {
    PipelineConfig pipeline;            // k, epsilon, repetitions, heuristic choice
    std::uint32_t population_size = 10; // per island
    double time_budget = 10.0;          // wall seconds, checked between generations
    std::uint32_t islands = 1;
    double alpha = 1.0;
    double beta = 0.0;
    std::uint64_t seed = 1;
    std::uint32_t exchange_period = 10; // generations between communication steps
    // when nonzero the wall clock is ignored, every island runs exactly this
    // many generations and event timestamps are generation indices
    std::uint64_t max_generations = 0;
    // operator mix, interpreted as weights
    double w_recombine = 0.5;
    double w_cross = 0.1;
    double w_mut_fresh = 0.2;
    double w_mut_self = 0.2;
};

inline Individual make_individual(const DirectedGraph& g, Partition p, const EvoConfig& cfg,
                                  double t) {
    Individual ind{std::move(p), 0.0, 0.0, t};
    ind.cut = ind.partition.cut_value();
    ind.fitness = fitness(g, ind.partition, cfg.alpha, cfg.beta);
    return ind;
}

/// Two-way tournament: two distinct individuals drawn uniformly, the lower
/// fitness wins, exact ties go to a coin flip. Returns the winner's index.
inline std::size_t tournament_select(const std::vector<Individual>& pop, std::mt19937_64& rng) {
    if (pop.size() < 2) throw PopulationTooSmall("tournament needs at least two individuals");
    std::size_t a = rng() % pop.size();
    std::size_t b = rng() % (pop.size() - 1);
    if (b >= a) ++b;
    if (pop[a].fitness < pop[b].fitness) return a;
    if (pop[b].fitness < pop[a].fitness) return b;
    return (rng() & 1) ? a : b;
}

/// Multi-level recombination: both parents' cut edges survive coarsening, the
/// better parent (by cut, random tie-break) seeds the coarsest level, and the
/// V-cycle refines upward with a uniformly random heuristic. The offspring is
/// therefore never worse than either parent.
inline Individual recombine(const DirectedGraph& g, const Individual& p1, const Individual& p2,
                            const EvoConfig& cfg, std::mt19937_64& rng) {
    EdgeSet blocked = p1.partition.cut_edges();
    blocked |= p2.partition.cut_edges();
    const Individual* better = &p1;
    if (p2.cut < p1.cut || (p2.cut == p1.cut && (rng() & 1))) better = &p2;
    Partition child = multilevel_refine(g, better->partition, blocked, LocalSearch::Any, rng);
    assert(child.cut_value() <= std::min(p1.cut, p2.cut));
    return make_individual(g, std::move(child), cfg, 0.0);
}

/// Cross recombination: a throwaway partner is built with perturbed k' and
/// epsilon', contributes only its cut edges to the blocked set, and p1 itself
/// seeds the coarsest level. The offspring stays a k-partition at epsilon.
inline Individual cross_recombine(const DirectedGraph& g, const Individual& p1,
                                  const EvoConfig& cfg, std::mt19937_64& rng) {
    std::uint32_t k = cfg.pipeline.k;
    std::uint32_t lo = std::max(2u, k / 4);
    std::uint32_t hi = std::max(lo, 4 * k);
    PipelineConfig other = cfg.pipeline;
    other.k = lo + static_cast<std::uint32_t>(rng() % (hi - lo + 1));
    other.epsilon =
        std::uniform_real_distribution<double>(cfg.pipeline.epsilon, 4.0 * cfg.pipeline.epsilon)(rng);

    EdgeSet blocked = p1.partition.cut_edges();
    try {
        Partition partner = multilevel_partition(g, other, rng);
        blocked |= partner.cut_edges();
    } catch (const InfeasibleSplit&) {
        // the perturbed k' can be unsplittable; fall back to p1's edges alone
    }
    Partition child = multilevel_refine(g, p1.partition, blocked, LocalSearch::Any, rng);
    assert(child.cut_value() <= p1.cut);
    return make_individual(g, std::move(child), cfg, 0.0);
}

enum class MutationVariant { Fresh, Self };

/// Mutation runs recombination machinery but installs the second partition at
/// the coarsest level. `Fresh` draws that partition from a new multi-level
/// run, so the offspring may be worse than p1; `Self` uses p1 itself.
inline Individual mutate(const DirectedGraph& g, const Individual& p1, MutationVariant variant,
                         const EvoConfig& cfg, std::mt19937_64& rng) {
    if (variant == MutationVariant::Self) return recombine(g, p1, p1, cfg, rng);
    std::optional<Partition> fresh;
    try {
        fresh = multilevel_partition(g, cfg.pipeline, rng);
    } catch (const InfeasibleSplit&) {
        // rare with sane epsilon; degrade to the self variant
        return recombine(g, p1, p1, cfg, rng);
    }
    EdgeSet blocked = p1.partition.cut_edges();
    blocked |= fresh->cut_edges();
    Partition child = multilevel_refine(g, *fresh, blocked, LocalSearch::Any, rng);
    return make_individual(g, std::move(child), cfg, 0.0);
}

/// Steady-state replacement: among population members whose cut is no better
/// than the offspring's, evict the one most similar to it (cut-edge-set
/// distance, ties to the lower index). With no such member the offspring is
/// discarded. Returns whether the offspring entered.
inline bool evict_insert(std::vector<Individual>& pop, Individual offspring) {
    std::size_t victim = pop.size();
    std::size_t best_dist = 0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (pop[i].cut < offspring.cut) continue;
        std::size_t d = partition_distance(pop[i].partition, offspring.partition);
        if (victim == pop.size() || d < best_dist) {
            victim = i;
            best_dist = d;
        }
    }
    if (victim == pop.size()) return false;
    pop[victim] = std::move(offspring);
    return true;
}

struct CutEvent {
    double t = 0.0;
    double cut = 0.0;
    std::uint32_t island = 0;
};

struct EvoResult {
    Individual best;
    std::vector<CutEvent> events;
};

namespace detail {

struct IslandState {
    std::vector<Individual> pop;
    std::mt19937_64 rng;
    std::optional<Individual> best_ever;  // by fitness, what rumor spreading sends
    double best_cut = 0.0;                // drives the event log
    std::vector<bool> delivered;          // islands that already received best_ever
    std::vector<CutEvent> events;
    std::vector<Individual> mailbox;
    std::mutex mail_mtx;
    std::uint64_t generation = 0;
};

inline void note_individual(IslandState& isl, const Individual& ind, std::uint32_t island_id,
                            double t) {
    if (!isl.best_ever || ind.fitness < isl.best_ever->fitness) {
        isl.best_ever = ind;
        isl.best_ever->creation_time = t;
        std::fill(isl.delivered.begin(), isl.delivered.end(), false);
    }
    if (ind.cut < isl.best_cut) {
        isl.best_cut = ind.cut;
        isl.events.push_back({t, ind.cut, island_id});
    }
}

template <typename Clock>
inline void init_island(const DirectedGraph& g, const EvoConfig& cfg, IslandState& isl,
                        std::uint32_t island_id, Clock&& clock) {
    isl.pop.reserve(cfg.population_size);
    for (std::uint32_t i = 0; i < cfg.population_size; ++i) {
        Partition p = multilevel_partition(g, cfg.pipeline, isl.rng);
        isl.pop.push_back(make_individual(g, std::move(p), cfg, clock()));
        const Individual& ind = isl.pop.back();
        if (!isl.best_ever || ind.fitness < isl.best_ever->fitness) isl.best_ever = ind;
        if (i == 0 || ind.cut < isl.best_cut) isl.best_cut = ind.cut;
    }
    isl.events.push_back({clock(), isl.best_cut, island_id});
    std::fill(isl.delivered.begin(), isl.delivered.end(), false);
}

inline Individual breed(const DirectedGraph& g, const EvoConfig& cfg, IslandState& isl) {
    double total = cfg.w_recombine + cfg.w_cross + cfg.w_mut_fresh + cfg.w_mut_self;
    double r = std::uniform_real_distribution<double>(0.0, total)(isl.rng);
    const Individual& a = isl.pop[tournament_select(isl.pop, isl.rng)];
    if (r < cfg.w_recombine) {
        const Individual& b = isl.pop[tournament_select(isl.pop, isl.rng)];
        return recombine(g, a, b, cfg, isl.rng);
    }
    r -= cfg.w_recombine;
    if (r < cfg.w_cross) return cross_recombine(g, a, cfg, isl.rng);
    r -= cfg.w_cross;
    if (r < cfg.w_mut_fresh) return mutate(g, a, MutationVariant::Fresh, cfg, isl.rng);
    return mutate(g, a, MutationVariant::Self, cfg, isl.rng);
}

inline void validate(const EvoConfig& cfg) {
    if (cfg.population_size < 2)
        throw std::invalid_argument("population_size must be at least 2");
    if (cfg.islands < 1) throw std::invalid_argument("islands must be at least 1");
    if (cfg.alpha < 0.0 || cfg.beta < 0.0 || (cfg.alpha == 0.0 && cfg.beta == 0.0))
        throw std::invalid_argument("fitness weights must be nonnegative and not both zero");
    double mix = cfg.w_recombine + cfg.w_cross + cfg.w_mut_fresh + cfg.w_mut_self;
    if (mix <= 0.0) throw std::invalid_argument("operator weights must have positive sum");
}

} // namespace detail

/// Island-parallel evolutionary search. Every island seeds its population with
/// independent multi-level runs, breeds one offspring per generation and
/// exchanges its best individual by rumor spreading every exchange_period
/// generations. With max_generations set the run is fully deterministic:
/// islands advance in lockstep on one thread and timestamps are generation
/// indices; otherwise islands run on their own threads against the wall-clock
/// budget. Returns the best individual by fitness plus all island-level
/// best-cut events.
inline EvoResult evolve_run(const DirectedGraph& g, const EvoConfig& cfg) {
    detail::validate(cfg);
    const std::uint32_t ni = cfg.islands;
    std::vector<detail::IslandState> islands(ni);
    for (std::uint32_t i = 0; i < ni; ++i) {
        islands[i].rng.seed(cfg.seed + 0x9E3779B97F4A7C15ULL * (i + 1));
        islands[i].delivered.assign(ni, false);
    }

    const bool lockstep = cfg.max_generations > 0;
    auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    if (lockstep) {
        std::mt19937_64 exchange_rng(cfg.seed ^ 0xD1B54A32D192ED03ULL);
        auto zero = [] { return 0.0; };
        for (std::uint32_t i = 0; i < ni; ++i) detail::init_island(g, cfg, islands[i], i, zero);
        for (std::uint64_t gen = 1; gen <= cfg.max_generations; ++gen) {
            double t = static_cast<double>(gen);
            for (std::uint32_t i = 0; i < ni; ++i) {
                Individual child = detail::breed(g, cfg, islands[i]);
                child.creation_time = t;
                detail::note_individual(islands[i], child, i, t);
                evict_insert(islands[i].pop, std::move(child));
            }
            if (ni > 1 && cfg.exchange_period > 0 && gen % cfg.exchange_period == 0) {
                for (std::uint32_t i = 0; i < ni; ++i) {
                    auto& isl = islands[i];
                    std::vector<std::uint32_t> eligible;
                    for (std::uint32_t j = 0; j < ni; ++j)
                        if (j != i && !isl.delivered[j]) eligible.push_back(j);
                    if (eligible.empty() || !isl.best_ever) continue;
                    std::uint32_t to = eligible[exchange_rng() % eligible.size()];
                    isl.delivered[to] = true;
                    Individual copy = *isl.best_ever;
                    detail::note_individual(islands[to], copy, to, t);
                    evict_insert(islands[to].pop, std::move(copy));
                }
            }
        }
    } else {
        auto worker = [&](std::uint32_t i) {
            auto& isl = islands[i];
            detail::init_island(g, cfg, isl, i, elapsed);
            while (elapsed() < cfg.time_budget) {
                ++isl.generation;
                {
                    std::vector<Individual> inbox;
                    {
                        std::lock_guard<std::mutex> lock(isl.mail_mtx);
                        inbox.swap(isl.mailbox);
                    }
                    for (auto& ind : inbox) {
                        detail::note_individual(isl, ind, i, elapsed());
                        evict_insert(isl.pop, std::move(ind));
                    }
                }
                Individual child = detail::breed(g, cfg, isl);
                child.creation_time = elapsed();
                detail::note_individual(isl, child, i, child.creation_time);
                evict_insert(isl.pop, std::move(child));
                if (ni > 1 && cfg.exchange_period > 0 &&
                    isl.generation % cfg.exchange_period == 0 && isl.best_ever) {
                    std::vector<std::uint32_t> eligible;
                    for (std::uint32_t j = 0; j < ni; ++j)
                        if (j != i && !isl.delivered[j]) eligible.push_back(j);
                    if (!eligible.empty()) {
                        std::uint32_t to = eligible[isl.rng() % eligible.size()];
                        isl.delivered[to] = true;
                        std::lock_guard<std::mutex> lock(islands[to].mail_mtx);
                        islands[to].mailbox.push_back(*isl.best_ever);
                    }
                }
            }
        };
        if (ni == 1) {
            worker(0);
        } else {
            std::vector<std::exception_ptr> errors(ni);
            std::vector<std::thread> threads;
            threads.reserve(ni);
            for (std::uint32_t i = 0; i < ni; ++i)
                threads.emplace_back([&, i] {
                    try {
                        worker(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            for (auto& th : threads) th.join();
            for (auto& err : errors)
                if (err) std::rethrow_exception(err);
        }
    }

    EvoResult result;
    const Individual* best = nullptr;
    for (auto& isl : islands) {
        assert(isl.best_ever.has_value());
        if (!best || isl.best_ever->fitness < best->fitness) best = &*isl.best_ever;
        result.events.insert(result.events.end(), isl.events.begin(), isl.events.end());
    }
    result.best = *best;
    std::stable_sort(result.events.begin(), result.events.end(),
                     [](const CutEvent& a, const CutEvent& b) { return a.t < b.t; });
    return result;
}

} // namespace dagp
