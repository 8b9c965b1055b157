#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dagp/errors.hpp"
#include "dagp/graph.hpp"
#include "dagp/partition.hpp"
#include "dagp/report.hpp"

namespace dagp {

/// Shortest representation that parses back to exactly the same double;
/// integral values print without a decimal point.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general);
    return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_double(const std::string& tok, std::size_t line, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(line, std::string("expected a number for ") + what + ", got '" + tok + "'");
    return v;
}

inline std::uint64_t parse_count(const std::string& tok, std::size_t line, const char* what) {
    std::uint64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError(line, std::string("expected a nonnegative integer for ") + what +
                                   ", got '" + tok + "'");
    return v;
}

inline std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> toks;
    std::string t;
    while (ss >> t) toks.push_back(t);
    return toks;
}

} // namespace detail

/// Graph file format: a header "n m", then one line per node
/// "c t d s_1 w_1 ... s_d w_d" with 1-indexed successors. Lines starting with
/// '%' are comments. Duplicate successors merge by weight; `merged` (when
/// given) receives how many pairs were merged away.
inline DirectedGraph parse_graph(std::istream& in, std::size_t* merged = nullptr) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](std::vector<std::string>& toks) {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line[0] == '%') continue;
            toks = detail::tokens_of(line);
            if (!toks.empty()) return true;
        }
        return false;
    };

    std::vector<std::string> toks;
    if (!next_line(toks)) throw ParseError(1, "missing header line");
    if (toks.size() != 2) throw ParseError(line_no, "header must be 'n m'");
    std::uint64_t n = detail::parse_count(toks[0], line_no, "node count");
    std::uint64_t m = detail::parse_count(toks[1], line_no, "edge count");

    std::vector<double> weights(n), exec(n);
    std::vector<DirectedGraph::Edge> edges;
    edges.reserve(m);
    std::uint64_t declared = 0;
    for (std::uint64_t v = 0; v < n; ++v) {
        if (!next_line(toks)) throw ParseError(line_no + 1, "unexpected end of file: node line missing");
        if (toks.size() < 3) throw ParseError(line_no, "node line needs 'c t d' prefix");
        weights[v] = detail::parse_double(toks[0], line_no, "node weight");
        if (weights[v] < 0.0) throw ParseError(line_no, "node weight must be nonnegative");
        exec[v] = detail::parse_double(toks[1], line_no, "exec time");
        if (exec[v] < 0.0) throw ParseError(line_no, "exec time must be nonnegative");
        std::uint64_t d = detail::parse_count(toks[2], line_no, "successor count");
        declared += d;
        if (toks.size() != 3 + 2 * d)
            throw ParseError(line_no, "expected " + std::to_string(2 * d) +
                                          " successor tokens, got " +
                                          std::to_string(toks.size() - 3));
        for (std::uint64_t j = 0; j < d; ++j) {
            std::uint64_t s = detail::parse_count(toks[3 + 2 * j], line_no, "successor id");
            double w = detail::parse_double(toks[4 + 2 * j], line_no, "edge weight");
            if (s < 1 || s > n)
                throw DanglingEdge(line_no, "successor " + std::to_string(s) +
                                                " out of range [1, " + std::to_string(n) + "]");
            if (s == v + 1) throw ParseError(line_no, "self loop on node " + std::to_string(s));
            if (w <= 0.0) throw ParseError(line_no, "edge weight must be positive");
            edges.push_back({static_cast<NodeId>(v), static_cast<NodeId>(s - 1), w});
        }
    }
    if (declared != m)
        throw ParseError(line_no, "successor counts sum to " + std::to_string(declared) +
                                      " but header promised " + std::to_string(m));
    return DirectedGraph::build(n, std::move(weights), std::move(exec), edges, merged);
}

inline void write_graph(std::ostream& out, const DirectedGraph& g) {
    out << g.num_nodes() << ' ' << g.num_edges() << '\n';
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        out << fmt_double(g.node_weight(v)) << ' ' << fmt_double(g.exec_time(v)) << ' '
            << g.out_degree(v);
        for (EdgeId e : g.out_edges(v)) {
            const auto& ed = g.edge(e);
            out << ' ' << ed.target + 1 << ' ' << fmt_double(ed.weight);
        }
        out << '\n';
    }
}

/// Partition file: one 0-indexed block id per line, node order.
inline std::vector<BlockId> parse_partition(std::istream& in) {
    std::vector<BlockId> blocks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '%') continue;
        auto toks = detail::tokens_of(line);
        if (toks.empty()) continue;
        if (toks.size() != 1) throw ParseError(line_no, "expected one block id per line");
        blocks.push_back(static_cast<BlockId>(detail::parse_count(toks[0], line_no, "block id")));
    }
    return blocks;
}

inline void write_partition(std::ostream& out, const std::vector<BlockId>& blocks) {
    for (BlockId b : blocks) out << b << '\n';
}

inline constexpr const char* kConvergenceHeader = "t_seconds,cut,instance,seed,island";

inline void write_convergence_csv(std::ostream& out, const std::vector<SeriesEntry>& entries) {
    out << kConvergenceHeader << '\n';
    for (const auto& e : entries)
        out << fmt_double(e.t) << ',' << fmt_double(e.cut) << ',' << e.instance << ',' << e.seed
            << ',' << e.island << '\n';
}

inline std::vector<SeriesEntry> read_convergence_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kConvergenceHeader)
        throw ParseError(1, std::string("expected header '") + kConvergenceHeader + "'");
    std::vector<SeriesEntry> entries;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            std::size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (fields.size() != 5) throw ParseError(line_no, "expected 5 comma-separated fields");
        SeriesEntry e;
        e.t = detail::parse_double(fields[0], line_no, "t_seconds");
        e.cut = detail::parse_double(fields[1], line_no, "cut");
        e.instance = fields[2];
        e.seed = detail::parse_count(fields[3], line_no, "seed");
        e.island = static_cast<std::uint32_t>(detail::parse_count(fields[4], line_no, "island"));
        entries.push_back(std::move(e));
    }
    return entries;
}

inline void write_profile_csv(std::ostream& out, const std::vector<MergedPoint>& points) {
    out << "t_n,geo_mean_cut\n";
    for (const auto& p : points) out << fmt_double(p.t_n) << ',' << fmt_double(p.geo_mean) << '\n';
}

inline void write_ratio_csv(std::ostream& out, const std::vector<RatioEntry>& ratios) {
    out << "algorithm,rank,ratio\n";
    for (const auto& r : ratios)
        out << r.algorithm << ',' << r.rank << ',' << fmt_double(r.ratio) << '\n';
}

// convenience file wrappers

inline DirectedGraph load_graph(const std::string& path, std::size_t* merged = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file '" + path + "'");
    return parse_graph(in, merged);
}

inline std::vector<BlockId> load_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open partition file '" + path + "'");
    return parse_partition(in);
}

inline void save_text(const std::string& path, const std::string& contents) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file '" + path + "'");
    out << contents;
}

} // namespace dagp
