#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <random>
#include <sstream>

#include "dagp/generator.hpp"
#include "dagp/io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dagp;

TEST_CASE("parse_graph reads the three-node chain") {
    std::istringstream in("3 2\n1 0 1 2 1\n1 0 1 3 1\n1 0 0\n");
    REQUIRE(parse_graph(in) == fixtures::chain3());
}

TEST_CASE("parse_graph skips comments and blank lines") {
    std::istringstream in(
        "% a tiny chain\n3 2\n\n1 0 1 2 1\n% middle node next\n1 0 1 3 1\n1 0 0\n");
    REQUIRE(parse_graph(in) == fixtures::chain3());
}

TEST_CASE("graph files round-trip through write and parse") {
    std::ostringstream out;
    write_graph(out, fixtures::diamond());
    std::istringstream in(out.str());
    REQUIRE(parse_graph(in) == fixtures::diamond());

    // canonical text is a fixpoint of parse-then-write
    std::istringstream again(out.str());
    std::ostringstream out2;
    write_graph(out2, parse_graph(again));
    REQUIRE(out.str() == out2.str());
}

TEST_CASE("graph files round-trip fractional weights exactly") {
    auto g = fixtures::make_graph(3, {{0, 1, 0.125}, {1, 2, 2.5}}, {0.5, 1.75, 3.0},
                                  {0.0, 1.5, 0.0625});
    std::ostringstream out;
    write_graph(out, g);
    std::istringstream in(out.str());
    REQUIRE(parse_graph(in) == g);
}

TEST_CASE("graph round-trip fuzz over random dags") {
    std::mt19937_64 rng(606);
    for (int iter = 0; iter < 100; ++iter) {
        auto g = oracles::random_dag(2 + iter % 25, 0.3, rng, 3, 5, 7);
        std::ostringstream out;
        write_graph(out, g);
        std::istringstream in(out.str());
        REQUIRE(parse_graph(in) == g);
    }
}

TEST_CASE("parse_graph reports dangling successors with their line") {
    std::istringstream in("3 2\n1 0 1 2 1\n1 0 1 99 1\n1 0 0\n");
    try {
        parse_graph(in);
        FAIL("expected DanglingEdge");
    } catch (const DanglingEdge& e) {
        REQUIRE(e.line() == 3);
    }
}

TEST_CASE("parse_graph merges duplicate successors and counts them") {
    std::istringstream in("3 2\n1 0 2 2 1 2 1\n1 0 0\n1 0 0\n");
    std::size_t merged = 0;
    auto g = parse_graph(in, &merged);
    REQUIRE(merged == 1);
    REQUIRE(g.num_edges() == 1);
    REQUIRE(g.edge(0).weight == 2.0);
}

TEST_CASE("parse_graph rejects malformed input") {
    auto expect_error = [](const std::string& text, std::size_t line) {
        std::istringstream in(text);
        try {
            parse_graph(in);
            FAIL("expected ParseError for: " << text);
        } catch (const ParseError& e) {
            REQUIRE(e.line() == line);
        }
    };
    expect_error("", 1);                                       // empty file
    expect_error("3\n", 1);                                    // bad header
    expect_error("x y\n", 1);                                  // non-numeric header
    expect_error("3 3\n1 0 1 2 1\n1 0 1 3 1\n1 0 0\n", 4);    // sum d != m
    expect_error("3 2\n1 0 1 2 1\n1 0 1 3 1\n", 4);           // missing node line
    expect_error("3 2\n1 0 1 2 1 9\n1 0 1 3 1\n1 0 0\n", 2);  // extra token
    expect_error("3 2\n1 0 2 2 1\n1 0 1 3 1\n1 0 0\n", 2);    // too few successor tokens
    expect_error("3 2\n-1 0 1 2 1\n1 0 1 3 1\n1 0 0\n", 2);   // negative weight
    expect_error("3 2\n1 -2 1 2 1\n1 0 1 3 1\n1 0 0\n", 2);   // negative exec
    expect_error("3 2\n1 0 1 2 0\n1 0 1 3 1\n1 0 0\n", 2);    // nonpositive edge weight
    expect_error("3 2\n1 0 1 1 1\n1 0 1 3 1\n1 0 0\n", 2);    // self loop
    expect_error("3 2\n1 0 one 2 1\n1 0 1 3 1\n1 0 0\n", 2);  // junk token
}

TEST_CASE("partition files round-trip") {
    std::vector<BlockId> blocks{0, 1, 2, 1};
    std::ostringstream out;
    write_partition(out, blocks);
    REQUIRE(out.str() == "0\n1\n2\n1\n");
    std::istringstream in(out.str());
    REQUIRE(parse_partition(in) == blocks);
}

TEST_CASE("parse_partition rejects junk") {
    std::istringstream bad("0\nx\n");
    REQUIRE_THROWS_AS(parse_partition(bad), ParseError);
    std::istringstream two("0 1\n");
    REQUIRE_THROWS_AS(parse_partition(two), ParseError);
}

TEST_CASE("convergence csv round-trips") {
    std::vector<SeriesEntry> entries{
        {0.5, 42.0, "2mm0", 7, 0},
        {1.25, 30.0, "2mm0", 7, 2},
        {0.75, 99.0, "atax", 8, 1},
    };
    std::ostringstream out;
    write_convergence_csv(out, entries);
    REQUIRE(out.str() == "t_seconds,cut,instance,seed,island\n"
                         "0.5,42,2mm0,7,0\n"
                         "1.25,30,2mm0,7,2\n"
                         "0.75,99,atax,8,1\n");
    std::istringstream in(out.str());
    REQUIRE(read_convergence_csv(in) == entries);
}

TEST_CASE("read_convergence_csv validates header and field count") {
    std::istringstream bad_header("time,cut\n");
    REQUIRE_THROWS_AS(read_convergence_csv(bad_header), ParseError);
    std::istringstream bad_fields("t_seconds,cut,instance,seed,island\n1,2,foo,3\n");
    REQUIRE_THROWS_AS(read_convergence_csv(bad_fields), ParseError);
    std::istringstream bad_value("t_seconds,cut,instance,seed,island\n1,x,foo,3,0\n");
    REQUIRE_THROWS_AS(read_convergence_csv(bad_value), ParseError);
}

TEST_CASE("profile and ratio csv writers emit the documented columns") {
    std::ostringstream profile;
    write_profile_csv(profile, {{1.5, 6.0}, {2.0, 3.0}});
    REQUIRE(profile.str() == "t_n,geo_mean_cut\n1.5,6\n2,3\n");

    std::ostringstream ratio;
    write_ratio_csv(ratio, {{"evo", 1, 1.0}, {"multi", 1, 0.1023}});
    REQUIRE(ratio.str() == "algorithm,rank,ratio\nevo,1,1\nmulti,1,0.1023\n");
}

TEST_CASE("fmt_double is compact and lossless") {
    REQUIRE(fmt_double(3.0) == "3");
    REQUIRE(fmt_double(0.5) == "0.5");
    REQUIRE(fmt_double(-2.25) == "-2.25");
    REQUIRE(fmt_double(0.0) == "0");

    std::mt19937_64 rng(707);
    for (int i = 0; i < 1000; ++i) {
        double x;
        if (i % 3 == 0)
            x = static_cast<double>(static_cast<std::int64_t>(rng()) / 1024);
        else
            x = std::uniform_real_distribution<double>(-1e6, 1e6)(rng);
        std::string s = fmt_double(x);
        double back = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), back);
        REQUIRE(res.ec == std::errc());
        REQUIRE(back == x);
    }
}

TEST_CASE("shipped sample graphs parse to the canonical fixtures") {
    const char* dir = std::getenv("DAGPART_DATA");
    REQUIRE(dir != nullptr);
    REQUIRE(load_graph(std::string(dir) + "/chain3.graph") == fixtures::chain3());
    REQUIRE(load_graph(std::string(dir) + "/diamond.graph") == fixtures::diamond());
}

TEST_CASE("generate_layered_dag builds connected acyclic layers") {
    std::mt19937_64 rng(808);
    for (int iter = 0; iter < 30; ++iter) {
        std::mt19937_64 r1(iter), r2(iter);
        std::uint32_t nodes = 10 + iter * 7;
        std::uint32_t layers = 2 + iter % 6;
        auto g = generate_layered_dag(nodes, layers, 0.3, r1);
        REQUIRE(g.num_nodes() == nodes);
        REQUIRE(is_acyclic(g));
        REQUIRE(g == generate_layered_dag(nodes, layers, 0.3, r2)); // deterministic
        for (NodeId v = 0; v < nodes; ++v) {
            REQUIRE(g.node_weight(v) == 1.0);
            REQUIRE(g.exec_time(v) >= 1.0);
            REQUIRE(g.exec_time(v) <= 10.0);
        }
        for (EdgeId e = 0; e < g.num_edges(); ++e) {
            REQUIRE(g.edge(e).weight >= 1.0);
            REQUIRE(g.edge(e).weight <= 10.0);
            REQUIRE(g.edge(e).source < g.edge(e).target); // edges point downward
        }
    }
}

TEST_CASE("generate_layered_dag density endpoints") {
    std::mt19937_64 rng(909);
    // 10 nodes in 5 layers of 2: density 0 leaves only the one-pred tree
    auto sparse = generate_layered_dag(10, 5, 0.0, rng);
    REQUIRE(sparse.num_edges() == 8); // every node outside layer 0 has one pred
    auto degs = detail::in_degrees(sparse);
    for (NodeId v = 2; v < 10; ++v) REQUIRE(degs[v] >= 1);
    for (NodeId v = 0; v < 2; ++v) REQUIRE(degs[v] == 0);

    // density 1 completes every adjacent-layer pair: 4 * (2*2) = 16 edges
    auto dense = generate_layered_dag(10, 5, 1.0, rng);
    REQUIRE(dense.num_edges() == 16);

    REQUIRE_THROWS_AS(generate_layered_dag(0, 3, 0.5, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(generate_layered_dag(5, 0, 0.5, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(generate_layered_dag(5, 2, 1.5, rng), std::invalid_argument);
}
