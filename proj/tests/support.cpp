#include "support.hpp"

#include <utility>

namespace fixtures {

using rca::CausalGraph;
using rca::ErrorDistribution;
using rca::Mechanism;
using rca::Scm;

Scm or_model() {
    CausalGraph graph({"X1", "X2", "D"}, {{0, 2}, {1, 2}}, 2);
    // Saturated weights: sigmoid(-60) and sigmoid(60) are 0 and 1 beyond
    // double resolution, so the label is the exact OR of the two errors.
    std::vector<Mechanism> mechs = {Mechanism::root(), Mechanism::root(),
                                    Mechanism::logistic(-60.0, {120.0, 120.0})};
    std::vector<ErrorDistribution> dists = {ErrorDistribution::discrete({0.0, 1.0}, {0.5, 0.5}),
                                            ErrorDistribution::discrete({0.0, 1.0}, {0.5, 0.5})};
    return Scm(std::move(graph), std::move(mechs), std::move(dists));
}

Scm chain_linear(double laplace_scale) {
    CausalGraph graph({"X1", "X2"}, {{0, 1}});
    std::vector<Mechanism> mechs = {Mechanism::root(), Mechanism::linear({0.8})};
    std::vector<ErrorDistribution> dists = {ErrorDistribution::laplace(0.0, laplace_scale),
                                            ErrorDistribution::laplace(0.0, laplace_scale)};
    return Scm(std::move(graph), std::move(mechs), std::move(dists));
}

Scm funnel_linear() {
    CausalGraph graph({"X1", "X2", "X3", "X4", "D"},
                      {{0, 2}, {1, 2}, {2, 3}, {3, 4}}, 4);
    std::vector<Mechanism> mechs = {Mechanism::root(), Mechanism::root(),
                                    Mechanism::linear({1.0, 1.0}), Mechanism::linear({1.0}),
                                    Mechanism::logistic(-2.0, {1.6})};
    std::vector<ErrorDistribution> dists(4, ErrorDistribution::gaussian(0.0, 1.0));
    return Scm(std::move(graph), std::move(mechs), std::move(dists));
}

namespace {

Scm assemble_discrete(std::size_t p, rca::Rng& rng, double edge_prob, double w_max,
                      bool isolate_last) {
    const std::size_t x_count = isolate_last ? p - 1 : p;
    CausalGraph x_graph = rca::random_dag(x_count, edge_prob, 3, rng);

    std::vector<std::string> names;
    for (std::size_t i = 0; i < p; ++i) names.push_back("X" + std::to_string(i + 1));
    names.push_back("D");

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t v = 0; v < x_count; ++v) {
        for (std::size_t c : x_graph.children(v)) edges.emplace_back(v, c);
    }

    // Nonempty random label parent set; the isolated coordinate never feeds D.
    std::vector<std::size_t> label_parents;
    while (label_parents.empty()) {
        label_parents.clear();
        for (std::size_t v = 0; v < x_count; ++v) {
            if (rng.uniform01() < 0.6) label_parents.push_back(v);
        }
    }
    for (std::size_t v : label_parents) edges.emplace_back(v, p);

    CausalGraph graph(std::move(names), std::move(edges), p);

    std::vector<Mechanism> mechs;
    for (std::size_t v = 0; v < p; ++v) {
        const std::size_t arity = graph.parents(v).size();
        if (arity == 0) {
            mechs.push_back(Mechanism::root());
        } else {
            std::vector<double> w(arity);
            for (double& wi : w) wi = rng.uniform(-w_max, w_max);
            mechs.push_back(Mechanism::linear(std::move(w)));
        }
    }
    std::vector<double> label_w(label_parents.size());
    for (double& wi : label_w) wi = rng.uniform(-w_max, w_max);
    mechs.push_back(Mechanism::logistic(rng.uniform(-1.0, 1.0), std::move(label_w)));

    std::vector<ErrorDistribution> dists;
    for (std::size_t v = 0; v < p; ++v) {
        const double q = rng.uniform(0.2, 0.8);
        dists.push_back(ErrorDistribution::discrete({0.0, 1.0}, {1.0 - q, q}));
    }
    return Scm(std::move(graph), std::move(mechs), std::move(dists));
}

}  // namespace

Scm random_discrete(std::size_t p, rca::Rng& rng, double edge_prob, double w_max) {
    return assemble_discrete(p, rng, edge_prob, w_max, false);
}

Scm random_discrete_with_nonancestor(std::size_t p, rca::Rng& rng, double edge_prob,
                                     double w_max) {
    return assemble_discrete(p, rng, edge_prob, w_max, true);
}

std::vector<oracle::Marginal> marginals_of(const rca::Scm& scm) {
    std::vector<oracle::Marginal> out;
    for (const auto& d : scm.error_dists()) {
        out.push_back({d.support(), d.probs()});
    }
    return out;
}

oracle::Predictor predictor_of(const rca::Scm& scm) {
    return [scm](std::span<const double> e) {
        return scm.label_probability(scm.push_forward(e));
    };
}

}  // namespace fixtures
