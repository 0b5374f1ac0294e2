#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rca/common.hpp"

namespace rca {

// Directed acyclic graph over named variables. Node order is the declaration
// order; every edge is stored by node index. Construction validates names,
// edge endpoints, duplicate edges, self loops, and acyclicity. An optional
// diagnosis node must be a sink.
class CausalGraph {
public:
    CausalGraph() = default;
    CausalGraph(std::vector<std::string> names,
                std::vector<std::pair<std::size_t, std::size_t>> edges,
                std::optional<std::size_t> diagnosis = std::nullopt);

    std::size_t size() const { return names_.size(); }
    bool has_diagnosis() const { return diagnosis_.has_value(); }
    std::size_t diagnosis() const;
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    std::size_t index_of(const std::string& name) const;
    bool has_edge(std::size_t from, std::size_t to) const;
    const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
    const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
    std::size_t edge_count() const;

    // Kahn's algorithm; ties broken by ascending node index so the order is
    // reproducible across platforms.
    std::vector<std::size_t> topo_order() const;

    // Ancestors of v, inclusive of v itself.
    std::vector<bool> ancestors(std::size_t v) const;

    // d-separation of x and y given z, via the reachable-by-active-path
    // ball-passing scheme over (node, entering-direction) states.
    bool d_separated(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const;

private:
    std::vector<std::string> names_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::optional<std::size_t> diagnosis_;
};

// Random DAG with node names X1..Xp: nodes are placed in a random causal
// order and each forward pair receives an edge with probability
// edge_prob, subject to max_parents. Used by the benchmark generator.
CausalGraph random_dag(std::size_t p, double edge_prob, std::size_t max_parents, Rng& rng);

}  // namespace rca
