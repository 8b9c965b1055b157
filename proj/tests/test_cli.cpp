#include <catch2/catch_amalgamated.hpp>

#include <dagp/io.hpp>
#include <dagp/report.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

// Locations injected by ctest: the built driver binary and the sample data dir.
std::string cli_path() {
    const char* p = std::getenv("DAGPART_CLI");
    REQUIRE(p != nullptr);
    return p;
}

std::string data_dir() {
    const char* p = std::getenv("DAGPART_DATA");
    REQUIRE(p != nullptr);
    return p;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Runs the driver with the given argument string, capturing stdout and the
// exit code. stderr is left attached to the test's stderr for diagnostics.
RunResult run_cli(const fs::path& work, const std::string& args) {
    fs::path out_file = work / "stdout.txt";
    std::string cmd = cli_path() + " " + args + " > " + out_file.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    REQUIRE(WIFEXITED(status));
    r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out_file);
    return r;
}

fs::path fresh_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("dagpart_cli_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    REQUIRE(out.good());
}

} // namespace

TEST_CASE("cli partitions the diamond and evaluate confirms the optimum", "[cli]") {
    fs::path work = fresh_dir("diamond");
    std::string graph = (fs::path(data_dir()) / "diamond.graph").string();

    auto part = run_cli(work, "partition --graph " + graph +
                                  " --k 2 --mode multi --seed 1 --output " +
                                  (work / "out.p").string());
    REQUIRE(part.exit_code == 0);

    // four lines over {0,1}; the only feasible splits cut 3 or 4 and the
    // pipeline finds the better one
    std::ifstream in(work / "out.p");
    std::vector<dagp::BlockId> blocks = dagp::parse_partition(in);
    REQUIRE(blocks.size() == 4);
    for (dagp::BlockId b : blocks) REQUIRE(b <= 1);

    auto ev = run_cli(work, "evaluate --graph " + graph + " --partition " +
                                (work / "out.p").string() + " --k 2");
    REQUIRE(ev.exit_code == 0);
    REQUIRE(ev.out.find("cut=3 ") != std::string::npos);
    REQUIRE(ev.out.find("feasible=true") != std::string::npos);
}

TEST_CASE("cli evaluate rejects a cyclic-quotient partition", "[cli]") {
    fs::path work = fresh_dir("cyclic");
    std::string graph = (fs::path(data_dir()) / "diamond.graph").string();
    // nodes 1 and 4 against 2 and 3: quotient has edges both ways
    write_file(work / "bad.p", "0\n1\n1\n0\n");

    auto ev = run_cli(work, "evaluate --graph " + graph + " --partition " +
                                (work / "bad.p").string());
    REQUIRE(ev.exit_code != 0);
    REQUIRE(ev.out.find("quotient_acyclic=false") != std::string::npos);
    REQUIRE(ev.out.find("feasible=false") != std::string::npos);
}

TEST_CASE("cli runs are byte-identical for equal flags and seed", "[cli]") {
    fs::path work = fresh_dir("determinism");
    auto gen = run_cli(work, "gen --nodes 80 --layers 8 --density 0.5 --seed 11 --output " +
                                 (work / "g.graph").string());
    REQUIRE(gen.exit_code == 0);

    const std::string modes[] = {
        "--mode single --seed 5",
        "--mode multi --seed 5",
        "--mode evo --seed 5 --islands 1 --population 6 --generations 25",
    };
    for (const std::string& mode : modes) {
        std::string base = "partition --graph " + (work / "g.graph").string() + " --k 4 " + mode;
        auto a = run_cli(work, base + " --output " + (work / "a.p").string() +
                                   " --convergence-log " + (work / "a.csv").string());
        auto b = run_cli(work, base + " --output " + (work / "b.p").string() +
                                   " --convergence-log " + (work / "b.csv").string());
        INFO(mode);
        REQUIRE(a.exit_code == 0);
        REQUIRE(b.exit_code == 0);
        REQUIRE(a.out == b.out);
        REQUIRE(slurp(work / "a.p") == slurp(work / "b.p"));
        REQUIRE(slurp(work / "a.csv") == slurp(work / "b.csv"));
    }
}

TEST_CASE("cli report matches the aggregation pipeline", "[cli]") {
    fs::path work = fresh_dir("report");

    // synthetic two-instance log with two repetitions on one of them
    std::vector<dagp::SeriesEntry> entries = {
        {0.0, 40.0, "ia", 1, 0}, {1.0, 30.0, "ia", 1, 0}, {3.0, 24.0, "ia", 1, 1},
        {0.0, 44.0, "ia", 2, 0}, {2.0, 28.0, "ia", 2, 0}, {0.0, 90.0, "ib", 1, 0},
        {2.5, 70.0, "ib", 1, 0}, {4.0, 61.0, "ib", 1, 0},
    };
    std::ostringstream csv;
    dagp::write_convergence_csv(csv, entries);
    write_file(work / "algo.csv", csv.str());

    auto rep = run_cli(work, "report --log algo=" + (work / "algo.csv").string() +
                                 " --t-norm 2.0 --out " + (work / "rep").string());
    REQUIRE(rep.exit_code == 0);

    std::ostringstream expected;
    dagp::write_profile_csv(expected, dagp::convergence_profile(entries, 2.0));
    REQUIRE(slurp(work / "rep" / "algo.profile.csv") == expected.str());

    // single algorithm: every instance ratio is 1
    std::string ratios = slurp(work / "rep" / "ratios.csv");
    REQUIRE(ratios == "algorithm,rank,ratio\nalgo,1,1\nalgo,2,1\n");
}

TEST_CASE("cli gen output parses back with matching counts", "[cli]") {
    fs::path work = fresh_dir("gen");
    auto gen = run_cli(work, "gen --nodes 50 --layers 5 --density 0.3 --seed 9 --output " +
                                 (work / "g.graph").string());
    REQUIRE(gen.exit_code == 0);

    dagp::DirectedGraph g = dagp::load_graph((work / "g.graph").string());
    std::ostringstream expect;
    expect << "nodes=" << g.num_nodes() << " edges=" << g.num_edges() << "\n";
    REQUIRE(gen.out == expect.str());
}

TEST_CASE("cli reports parse failures with a diagnostic exit", "[cli]") {
    fs::path work = fresh_dir("badinput");
    write_file(work / "bad.graph", "3 2\n1 0 1 99 1\n1 0 0\n1 0 0\n");

    auto r = run_cli(work, "partition --graph " + (work / "bad.graph").string() +
                               " --k 2 --mode multi --output " + (work / "x.p").string() +
                               " 2> " + (work / "err.txt").string());
    REQUIRE(r.exit_code != 0);
    REQUIRE(slurp(work / "err.txt").find("line 2") != std::string::npos);
}
