#include <doctest.h>

#include <algorithm>
#include <vector>

#include "oracle.hpp"
#include "rca/graph.hpp"

using rca::CausalGraph;

namespace {

CausalGraph funnel() {
    // X1 -> X3 <- X2, X3 -> X4 -> D.
    return CausalGraph({"X1", "X2", "X3", "X4", "D"}, {{0, 2}, {1, 2}, {2, 3}, {3, 4}}, 4);
}

std::vector<std::size_t> set_bits(const std::vector<bool>& mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) out.push_back(i);
    }
    return out;
}

}  // namespace

TEST_CASE("construction rejects structural defects") {
    CHECK_THROWS_AS(CausalGraph({"A", "B"}, {{0, 1}, {1, 0}}), rca::GraphError);  // 2-cycle
    CHECK_THROWS_AS(CausalGraph({"A"}, {{0, 0}}), rca::GraphError);               // self loop
    CHECK_THROWS_AS(CausalGraph({"A", "B"}, {{0, 1}, {0, 1}}), rca::GraphError);  // duplicate
    CHECK_THROWS_AS(CausalGraph({"A", "B"}, {{0, 2}}), rca::GraphError);          // out of range
    CHECK_THROWS_AS(CausalGraph({"A", "A"}, {}), rca::GraphError);                // name clash
    // The diagnosis must be a sink.
    CHECK_THROWS_AS(CausalGraph({"D", "B"}, {{0, 1}}, 0), rca::GraphError);
    CHECK_NOTHROW(CausalGraph({"B", "D"}, {{0, 1}}, 1));
}

TEST_CASE("topological order on the funnel graph") {
    const auto order = funnel().topo_order();
    CHECK(order == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("topological order without constraints is index order") {
    CausalGraph g({"A", "B", "C"}, {});
    CHECK(g.topo_order() == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("ancestor queries on the funnel graph") {
    const CausalGraph g = funnel();
    CHECK(set_bits(g.ancestors(4)) == std::vector<std::size_t>{0, 1, 2, 3, 4});
    CHECK(set_bits(g.ancestors(0)) == std::vector<std::size_t>{0});
    CHECK(set_bits(g.ancestors(2)) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("d-separation on hand graphs") {
    // Chain X1 -> X2 -> X3: conditioning on the middle blocks.
    CausalGraph chain({"X1", "X2", "X3"}, {{0, 1}, {1, 2}});
    CHECK(chain.d_separated(0, 2, {1}));
    CHECK_FALSE(chain.d_separated(0, 2, {}));

    // Collider X1 -> X3 <- X2: open only when conditioning on the collider.
    CausalGraph collider({"X1", "X2", "X3"}, {{0, 2}, {1, 2}});
    CHECK(collider.d_separated(0, 1, {}));
    CHECK_FALSE(collider.d_separated(0, 1, {2}));

    // Funnel: X2 and D separated by the mediator X3.
    CHECK(funnel().d_separated(1, 4, {2}));
}

TEST_CASE("queries validate their index arguments") {
    const CausalGraph g = funnel();
    CHECK_THROWS_AS(g.ancestors(9), rca::GraphError);
    CHECK_THROWS_AS(g.d_separated(0, 9, {}), rca::GraphError);
    CHECK_THROWS_AS(g.d_separated(0, 0, {}), rca::GraphError);
    // Endpoints may not sit inside the conditioning set.
    CHECK_THROWS_AS(g.d_separated(0, 4, {0}), rca::GraphError);
}

TEST_CASE("random DAGs: topo order validity and ancestor oracle agreement") {
    rca::Rng rng(2024);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t p = 2 + rng.index(5);
        const CausalGraph g = rca::random_dag(p, 0.5, 3, rng);

        std::vector<oracle::Edge> edges;
        for (std::size_t v = 0; v < p; ++v) {
            for (std::size_t c : g.children(v)) edges.emplace_back(v, c);
        }

        // Every edge points forward in the topological order.
        const auto order = g.topo_order();
        std::vector<std::size_t> pos(p);
        for (std::size_t i = 0; i < p; ++i) pos[order[i]] = i;
        for (const auto& [from, to] : edges) CHECK(pos[from] < pos[to]);

        // Parent caps hold.
        for (std::size_t v = 0; v < p; ++v) CHECK(g.parents(v).size() <= 3);

        for (std::size_t v = 0; v < p; ++v) {
            CHECK(g.ancestors(v) == oracle::bfs_ancestors(p, edges, v));
        }
    }
}

TEST_CASE("random DAGs: d-separation agrees with exhaustive path enumeration") {
    rca::Rng rng(77);
    int checked = 0;
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t p = 3 + rng.index(4);  // 3..6 nodes
        const CausalGraph g = rca::random_dag(p, 0.5, 3, rng);
        std::vector<oracle::Edge> edges;
        for (std::size_t v = 0; v < p; ++v) {
            for (std::size_t c : g.children(v)) edges.emplace_back(v, c);
        }
        for (std::size_t x = 0; x < p; ++x) {
            for (std::size_t y = x + 1; y < p; ++y) {
                // Every conditioning subset of the remaining nodes.
                std::vector<std::size_t> rest;
                for (std::size_t v = 0; v < p; ++v) {
                    if (v != x && v != y) rest.push_back(v);
                }
                for (std::uint64_t mask = 0; mask < (1ULL << rest.size()); ++mask) {
                    std::vector<std::size_t> z;
                    for (std::size_t k = 0; k < rest.size(); ++k) {
                        if (mask & (1ULL << k)) z.push_back(rest[k]);
                    }
                    CHECK(g.d_separated(x, y, z) == oracle::paths_d_separated(p, edges, x, y, z));
                    ++checked;
                }
            }
        }
    }
    CHECK(checked > 1000);
}
