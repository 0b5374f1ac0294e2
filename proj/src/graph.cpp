#include "rca/graph.hpp"

#include <algorithm>
#include <array>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace rca {

CausalGraph::CausalGraph(std::vector<std::string> names,
                         std::vector<std::pair<std::size_t, std::size_t>> edges,
                         std::optional<std::size_t> diagnosis)
    : names_(std::move(names)), diagnosis_(diagnosis) {
    const std::size_t n = names_.size();
    if (n == 0) throw GraphError("graph has no nodes");
    std::unordered_set<std::string> seen;
    for (const auto& name : names_) {
        if (name.empty()) throw GraphError("empty node name");
        if (!seen.insert(name).second) throw GraphError("duplicate node name: " + name);
    }
    parents_.assign(n, {});
    children_.assign(n, {});
    std::set<std::pair<std::size_t, std::size_t>> edge_set;
    for (const auto& [from, to] : edges) {
        if (from >= n || to >= n) throw GraphError("edge endpoint out of range");
        if (from == to) throw GraphError("self loop on node: " + names_[from]);
        if (!edge_set.insert({from, to}).second) {
            throw GraphError("duplicate edge: " + names_[from] + " -> " + names_[to]);
        }
        parents_[to].push_back(from);
        children_[from].push_back(to);
    }
    for (auto& v : parents_) std::sort(v.begin(), v.end());
    for (auto& v : children_) std::sort(v.begin(), v.end());
    if (diagnosis_) {
        if (*diagnosis_ >= n) throw GraphError("diagnosis index out of range");
        if (!children_[*diagnosis_].empty()) {
            throw GraphError("diagnosis node must be a sink: " + names_[*diagnosis_]);
        }
    }
    topo_order();  // throws on cycles
}

std::size_t CausalGraph::diagnosis() const {
    if (!diagnosis_) throw GraphError("graph has no diagnosis node");
    return *diagnosis_;
}

std::size_t CausalGraph::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return i;
    }
    throw GraphError("unknown node name: " + name);
}

bool CausalGraph::has_edge(std::size_t from, std::size_t to) const {
    const auto& ch = children_.at(from);
    return std::binary_search(ch.begin(), ch.end(), to);
}

std::size_t CausalGraph::edge_count() const {
    std::size_t c = 0;
    for (const auto& ch : children_) c += ch.size();
    return c;
}

std::vector<std::size_t> CausalGraph::topo_order() const {
    const std::size_t n = size();
    std::vector<std::size_t> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = parents_[i].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) ready.push(i);
    }
    std::vector<std::size_t> order;
    order.reserve(n);
    while (!ready.empty()) {
        const std::size_t u = ready.top();
        ready.pop();
        order.push_back(u);
        for (std::size_t v : children_[u]) {
            if (--indegree[v] == 0) ready.push(v);
        }
    }
    if (order.size() != n) {
        // Name one node that is still blocked so the message is actionable.
        for (std::size_t i = 0; i < n; ++i) {
            if (indegree[i] > 0) {
                throw GraphError("cycle detected involving node: " + names_[i]);
            }
        }
        throw GraphError("cycle detected");
    }
    return order;
}

std::vector<bool> CausalGraph::ancestors(std::size_t v) const {
    if (v >= size()) throw GraphError("ancestors: node index out of range");
    std::vector<bool> mark(size(), false);
    std::vector<std::size_t> stack{v};
    mark[v] = true;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t p : parents_[u]) {
            if (!mark[p]) {
                mark[p] = true;
                stack.push_back(p);
            }
        }
    }
    return mark;
}

bool CausalGraph::d_separated(std::size_t x, std::size_t y,
                              const std::vector<std::size_t>& z) const {
    const std::size_t n = size();
    if (x >= n || y >= n) throw GraphError("d_separated: node index out of range");
    std::vector<bool> in_z(n, false);
    for (std::size_t c : z) {
        if (c >= n) throw GraphError("d_separated: conditioning index out of range");
        if (c == x || c == y) throw GraphError("d_separated: endpoint inside conditioning set");
        in_z[c] = true;
    }
    if (x == y) throw GraphError("d_separated: endpoints must be distinct");

    // Nodes with a descendant in z (or in z themselves) keep colliders open.
    std::vector<bool> anc_of_z(n, false);
    {
        std::vector<std::size_t> stack;
        for (std::size_t i = 0; i < n; ++i) {
            if (in_z[i]) {
                anc_of_z[i] = true;
                stack.push_back(i);
            }
        }
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t p : parents_[u]) {
                if (!anc_of_z[p]) {
                    anc_of_z[p] = true;
                    stack.push_back(p);
                }
            }
        }
    }

    // State (node, direction): direction 0 = arrived via an edge out of the
    // node (moving against arrows), 1 = arrived via an edge into the node.
    std::vector<std::array<bool, 2>> visited(n, {false, false});
    std::vector<std::pair<std::size_t, int>> stack;
    stack.emplace_back(x, 0);
    visited[x][0] = true;
    while (!stack.empty()) {
        auto [u, dir] = stack.back();
        stack.pop_back();
        if (u == y) return false;
        if (dir == 0) {
            if (!in_z[u]) {
                for (std::size_t p : parents_[u]) {
                    if (!visited[p][0]) { visited[p][0] = true; stack.emplace_back(p, 0); }
                }
                for (std::size_t c : children_[u]) {
                    if (!visited[c][1]) { visited[c][1] = true; stack.emplace_back(c, 1); }
                }
            }
        } else {
            if (!in_z[u]) {
                for (std::size_t c : children_[u]) {
                    if (!visited[c][1]) { visited[c][1] = true; stack.emplace_back(c, 1); }
                }
            }
            if (anc_of_z[u]) {
                for (std::size_t p : parents_[u]) {
                    if (!visited[p][0]) { visited[p][0] = true; stack.emplace_back(p, 0); }
                }
            }
        }
    }
    return true;
}

CausalGraph random_dag(std::size_t p, double edge_prob, std::size_t max_parents, Rng& rng) {
    if (p == 0) throw GraphError("random_dag: p must be positive");
    if (edge_prob < 0.0 || edge_prob > 1.0) throw GraphError("random_dag: edge_prob outside [0,1]");
    std::vector<std::string> names;
    names.reserve(p);
    for (std::size_t i = 1; i <= p; ++i) names.push_back("X" + std::to_string(i));
    const std::vector<std::size_t> order = rng.permutation(p);
    std::vector<std::size_t> rank(p);
    for (std::size_t pos = 0; pos < p; ++pos) rank[order[pos]] = pos;
    std::vector<std::size_t> parent_count(p, 0);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            const std::size_t from = order[a];
            const std::size_t to = order[b];
            if (parent_count[to] >= max_parents) continue;
            if (rng.uniform01() < edge_prob) {
                edges.emplace_back(from, to);
                ++parent_count[to];
            }
        }
    }
    (void)rank;
    return CausalGraph(std::move(names), std::move(edges));
}

}  // namespace rca
