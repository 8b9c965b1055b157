#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dagp {

/// Thrown when an operation requires a DAG but the graph contains a cycle.
class CycleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when two partitions do not refer to the same edge universe.
class MismatchedGraph : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when no feasible consecutive split of a topological order exists.
class InfeasibleSplit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a selection operator needs more individuals than the population holds.
class PopulationTooSmall : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an aggregation receives no instances to merge.
class EmptyInstance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an algorithm lacks a result for an instance present elsewhere.
class MissingValue : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input file error carrying the 1-based line number it was detected on.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A successor index in a graph file points outside 1..n.
class DanglingEdge : public ParseError {
public:
    using ParseError::ParseError;
};

} // namespace dagp
