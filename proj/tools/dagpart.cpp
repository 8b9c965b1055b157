// dagpart: partition DAGs into balanced acyclic blocks, evaluate the results
// and aggregate convergence logs into report CSVs.

#include <CLI11.hpp>

#include <dagp/evolve.hpp>
#include <dagp/generator.hpp>
#include <dagp/io.hpp>
#include <dagp/multilevel.hpp>
#include <dagp/partition.hpp>
#include <dagp/report.hpp>
#include <dagp/sched.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

dagp::DirectedGraph load_graph_warn(const std::string& path) {
    std::size_t merged = 0;
    dagp::DirectedGraph g = dagp::load_graph(path, &merged);
    if (merged > 0)
        std::cerr << "warning: " << path << ": merged " << merged
                  << " duplicate successor entries\n";
    return g;
}

struct PartitionArgs {
    std::string graph_path;
    std::uint32_t k = 2;
    bool k_sweep = false;
    double epsilon = 0.03;
    std::string mode = "multi";
    std::uint64_t seed = 1;
    double time_budget = 10.0;
    std::uint32_t islands = 1;
    std::uint32_t population = 10;
    double alpha = 1.0;
    double beta = 0.0;
    std::uint64_t generations = 0;
    std::string output;
    std::string convergence_log;
};

// Runs one partitioning job and returns the log rows it produced. Single and
// multi level runs are single events at t = 0 so identical invocations stay
// byte-identical; evolutionary runs log every island improvement.
std::vector<dagp::SeriesEntry> run_one_partition(const dagp::DirectedGraph& g,
                                                 const PartitionArgs& a, std::uint32_t k,
                                                 const std::string& instance,
                                                 const std::string& out_path) {
    dagp::PipelineConfig pcfg;
    pcfg.k = k;
    pcfg.epsilon = a.epsilon;
    pcfg.seed = a.seed;

    dagp::Partition part;
    std::vector<dagp::SeriesEntry> log;
    if (a.mode == "single" || a.mode == "multi") {
        part = a.mode == "single" ? dagp::single_level_partition(g, pcfg)
                                  : dagp::multilevel_partition(g, pcfg);
        log.push_back({0.0, part.cut_value(), instance, a.seed, 0});
    } else {
        dagp::EvoConfig ecfg;
        ecfg.pipeline = pcfg;
        ecfg.population_size = a.population;
        ecfg.time_budget = a.time_budget;
        ecfg.islands = a.islands;
        ecfg.alpha = a.alpha;
        ecfg.beta = a.beta;
        ecfg.seed = a.seed;
        ecfg.max_generations = a.generations;
        dagp::EvoResult res = dagp::evolve_run(g, ecfg);
        part = std::move(res.best.partition);
        for (const auto& e : res.events) log.push_back({e.t, e.cut, instance, a.seed, e.island});
    }

    dagp::FeasibilityReport rep = dagp::check_feasibility(g, part);
    if (!rep.feasible()) {
        // must never leave this binary; every pipeline guarantees feasibility
        std::cerr << "internal error: produced an infeasible partition\n";
        std::abort();
    }

    std::ostringstream body;
    dagp::write_partition(body, part.blocks());
    dagp::save_text(out_path, body.str());

    std::cout << "instance=" << instance << " k=" << k << " mode=" << a.mode
              << " cut=" << dagp::fmt_double(part.cut_value())
              << " l_max=" << dagp::fmt_double(rep.l_max) << " feasible=true\n";
    return log;
}

int cmd_partition(const PartitionArgs& a) {
    dagp::DirectedGraph g = load_graph_warn(a.graph_path);
    const std::string instance = stem_of(a.graph_path);

    std::vector<std::uint32_t> ks;
    if (a.k_sweep)
        ks = {2, 4, 8, 16, 32};
    else
        ks = {a.k};

    std::vector<dagp::SeriesEntry> log;
    for (std::uint32_t k : ks) {
        std::string out = a.output;
        std::string name = instance;
        if (a.k_sweep) {
            // distinct instance names keep concatenated sweep logs aggregatable
            out += ".k" + std::to_string(k);
            name += ".k" + std::to_string(k);
        }
        auto rows = run_one_partition(g, a, k, name, out);
        log.insert(log.end(), rows.begin(), rows.end());
    }

    if (!a.convergence_log.empty()) {
        std::ostringstream csv;
        dagp::write_convergence_csv(csv, log);
        dagp::save_text(a.convergence_log, csv.str());
    }
    return 0;
}

int cmd_evaluate(const std::string& graph_path, const std::string& partition_path,
                 std::uint32_t k, double epsilon) {
    dagp::DirectedGraph g = load_graph_warn(graph_path);
    std::vector<dagp::BlockId> blocks = dagp::load_partition(partition_path);
    if (blocks.size() != g.num_nodes())
        throw std::runtime_error("partition has " + std::to_string(blocks.size()) +
                                 " lines but the graph has " + std::to_string(g.num_nodes()) +
                                 " nodes");
    if (k == 0) {
        for (dagp::BlockId b : blocks) k = std::max(k, b + 1);
        if (k == 0) k = 1; // empty graph
    }
    dagp::Partition part = dagp::Partition::build(g, std::move(blocks), k, epsilon);
    dagp::FeasibilityReport rep = dagp::check_feasibility(g, part);

    std::cout << "cut=" << dagp::fmt_double(part.cut_value())
              << " critical_path=" << dagp::fmt_double(dagp::critical_path_estimate(g, part))
              << " l_max=" << dagp::fmt_double(rep.l_max)
              << " overloaded_blocks=" << rep.overloaded_blocks.size()
              << " quotient_acyclic=" << (rep.quotient_acyclic ? "true" : "false")
              << " feasible=" << (rep.feasible() ? "true" : "false") << "\n";
    return rep.feasible() ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& log_specs, double t_norm,
               const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::map<std::string, std::map<std::string, double>> cut_per_algorithm;
    for (const std::string& spec : log_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
            throw std::runtime_error("--log expects label=path, got '" + spec + "'");
        const std::string label = spec.substr(0, eq);
        const std::string path = spec.substr(eq + 1);

        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open log file '" + path + "'");
        std::vector<dagp::SeriesEntry> entries = dagp::read_convergence_csv(in);

        auto profile = dagp::convergence_profile(entries, t_norm);
        std::ostringstream csv;
        dagp::write_profile_csv(csv, profile);
        dagp::save_text((std::filesystem::path(out_dir) / (label + ".profile.csv")).string(),
                        csv.str());

        auto& cuts = cut_per_algorithm[label];
        for (const auto& e : entries) {
            auto it = cuts.find(e.instance);
            if (it == cuts.end())
                cuts.emplace(e.instance, e.cut);
            else
                it->second = std::min(it->second, e.cut);
        }
    }

    auto ratios = dagp::performance_ratios(cut_per_algorithm);
    std::ostringstream csv;
    dagp::write_ratio_csv(csv, ratios);
    dagp::save_text((std::filesystem::path(out_dir) / "ratios.csv").string(), csv.str());
    return 0;
}

int cmd_gen(std::uint32_t nodes, std::uint32_t layers, double density, std::uint64_t seed,
            const std::string& output) {
    std::mt19937_64 rng(seed);
    dagp::DirectedGraph g = dagp::generate_layered_dag(nodes, layers, density, rng);
    std::ostringstream body;
    dagp::write_graph(body, g);
    dagp::save_text(output, body.str());
    std::cout << "nodes=" << g.num_nodes() << " edges=" << g.num_edges() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acyclic DAG partitioning driver"};
    app.require_subcommand(1);

    PartitionArgs pa;
    CLI::App* part = app.add_subcommand("partition", "Partition a DAG into k balanced blocks");
    part->add_option("--graph", pa.graph_path, "Input graph file")
        ->required()
        ->check(CLI::ExistingFile);
    part->add_option("--k", pa.k, "Number of blocks")->check(CLI::PositiveNumber);
    part->add_flag("--k-sweep", pa.k_sweep, "Run k in {2,4,8,16,32}; outputs get a .k<k> suffix");
    part->add_option("--epsilon", pa.epsilon, "Imbalance tolerance")->check(CLI::NonNegativeNumber);
    part->add_option("--mode", pa.mode, "Algorithm")
        ->check(CLI::IsMember({"single", "multi", "evo"}));
    part->add_option("--seed", pa.seed, "Random seed");
    part->add_option("--time-budget", pa.time_budget, "Evolution wall-clock budget in seconds")
        ->check(CLI::PositiveNumber);
    part->add_option("--islands", pa.islands, "Concurrent islands")->check(CLI::PositiveNumber);
    part->add_option("--population", pa.population, "Individuals per island")
        ->check(CLI::PositiveNumber);
    part->add_option("--alpha", pa.alpha, "Fitness weight on the cut");
    part->add_option("--beta", pa.beta, "Fitness weight on the critical path estimate");
    part->add_option("--generations", pa.generations,
                     "Fixed generation count; replaces the wall clock and makes evolutionary "
                     "runs deterministic");
    part->add_option("--output", pa.output, "Partition file to write")->required();
    part->add_option("--convergence-log", pa.convergence_log, "CSV log of cut improvements");

    std::string ev_graph, ev_partition;
    std::uint32_t ev_k = 0;
    double ev_epsilon = 0.03;
    CLI::App* ev = app.add_subcommand("evaluate", "Recompute cut and feasibility of a partition");
    ev->add_option("--graph", ev_graph, "Input graph file")->required()->check(CLI::ExistingFile);
    ev->add_option("--partition", ev_partition, "Partition file")
        ->required()
        ->check(CLI::ExistingFile);
    ev->add_option("--k", ev_k, "Block count; defaults to max block id + 1");
    ev->add_option("--epsilon", ev_epsilon, "Imbalance tolerance")->check(CLI::NonNegativeNumber);

    std::vector<std::string> rep_logs;
    double rep_t_norm = 1.0;
    std::string rep_out;
    CLI::App* rep = app.add_subcommand("report", "Aggregate convergence logs into CSVs");
    rep->add_option("--log", rep_logs, "label=path of a convergence log; repeatable")
        ->required()
        ->take_all();
    rep->add_option("--t-norm", rep_t_norm, "Time normalizer t_I")->check(CLI::PositiveNumber);
    rep->add_option("--out", rep_out, "Output directory")->required();

    std::uint32_t gn_nodes = 100, gn_layers = 10;
    double gn_density = 0.5;
    std::uint64_t gn_seed = 1;
    std::string gn_output;
    CLI::App* gn = app.add_subcommand("gen", "Generate a layered random DAG");
    gn->add_option("--nodes", gn_nodes, "Node count")->check(CLI::PositiveNumber);
    gn->add_option("--layers", gn_layers, "Layer count")->check(CLI::PositiveNumber);
    gn->add_option("--density", gn_density, "Extra-edge probability between adjacent layers")
        ->check(CLI::Range(0.0, 1.0));
    gn->add_option("--seed", gn_seed, "Random seed");
    gn->add_option("--output", gn_output, "Graph file to write")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (part->parsed()) return cmd_partition(pa);
        if (ev->parsed()) return cmd_evaluate(ev_graph, ev_partition, ev_k, ev_epsilon);
        if (rep->parsed()) return cmd_report(rep_logs, rep_t_norm, rep_out);
        return cmd_gen(gn_nodes, gn_layers, gn_density, gn_seed, gn_output);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
