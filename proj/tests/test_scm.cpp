#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "rca/scm.hpp"
#include "rca/serialize.hpp"
#include "support.hpp"

using rca::CausalGraph;
using rca::ErrorDistribution;
using rca::Mechanism;
using rca::Scm;

TEST_CASE("error distributions expose correct moments and discrete mass") {
    const auto u = ErrorDistribution::uniform(-1.0, 3.0);
    CHECK(u.mean() == doctest::Approx(1.0));
    CHECK(u.variance() == doctest::Approx(16.0 / 12.0));

    const auto l = ErrorDistribution::laplace(0.5, 2.0);
    CHECK(l.mean() == 0.5);
    CHECK(l.variance() == doctest::Approx(8.0));

    const auto g = ErrorDistribution::gaussian(-2.0, 3.0);
    CHECK(g.mean() == -2.0);
    CHECK(g.stddev() == 3.0);

    const auto d = ErrorDistribution::discrete({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5});
    CHECK(d.mean() == doctest::Approx(1.3));
    CHECK(d.prob_of(2.0) == 0.5);
    CHECK(d.prob_of(7.0) == 0.0);
    CHECK_THROWS_AS(ErrorDistribution::discrete({0.0, 1.0}, {0.6, 0.6}), rca::ModelError);
    CHECK_THROWS_AS(ErrorDistribution::discrete({}, {}), rca::ModelError);
    CHECK_THROWS_AS(u.support(), rca::UnsupportedError);
}

TEST_CASE("mechanism arity is validated against the graph") {
    CausalGraph graph({"X1", "X2"}, {{0, 1}});
    std::vector<ErrorDistribution> dists(2, ErrorDistribution::gaussian(0.0, 1.0));
    // Linear mechanism with the wrong weight count.
    CHECK_THROWS_AS(Scm(graph, {Mechanism::root(), Mechanism::linear({0.5, 0.5})}, dists),
                    rca::ModelError);
    // Root mechanism on a node with parents.
    CHECK_THROWS_AS(Scm(graph, {Mechanism::root(), Mechanism::root()}, dists), rca::ModelError);
    // Logistic label away from the diagnosis node.
    CHECK_THROWS_AS(Scm(graph, {Mechanism::root(), Mechanism::logistic(0.0, {1.0})}, dists),
                    rca::ModelError);
    CHECK_NOTHROW(Scm(graph, {Mechanism::root(), Mechanism::linear({0.5})}, dists));
}

TEST_CASE("push_forward on hand examples") {
    // Roots are identities.
    CausalGraph roots({"X1", "X2"}, {});
    Scm root_scm(roots, {Mechanism::root(), Mechanism::root()},
                 {ErrorDistribution::gaussian(0.0, 1.0), ErrorDistribution::gaussian(0.0, 1.0)});
    const auto x0 = root_scm.push_forward(std::vector<double>{0.3, -1.2});
    CHECK(x0[0] == 0.3);
    CHECK(x0[1] == -1.2);

    // One linear step.
    const Scm chain = fixtures::chain_linear();
    const auto x1 = chain.push_forward(std::vector<double>{1.0, 0.5});
    CHECK(x1[0] == 1.0);
    CHECK(x1[1] == doctest::Approx(1.3).epsilon(1e-15));

    // Funnel with unit weights, hand-evaluated in topological order.
    const Scm funnel = fixtures::funnel_linear();
    const auto x2 = funnel.push_forward(std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK(x2[0] == 1.0);
    CHECK(x2[1] == 0.0);
    CHECK(x2[2] == 1.0);
    CHECK(x2[3] == 1.0);

    CHECK_THROWS_AS(chain.push_forward(std::vector<double>{1.0}), rca::ModelError);
}

TEST_CASE("invert on hand examples and random roundtrips") {
    const Scm chain = fixtures::chain_linear();
    const auto e = chain.invert(std::vector<double>{1.0, 1.3});
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(e[1] == doctest::Approx(0.5).epsilon(1e-15));

    // Random linear DAG roundtrip, p=6.
    rca::Rng rng(31);
    const CausalGraph g = rca::random_dag(6, 0.5, 3, rng);
    std::vector<Mechanism> mechs;
    for (std::size_t v = 0; v < 6; ++v) {
        const std::size_t arity = g.parents(v).size();
        if (arity == 0) {
            mechs.push_back(Mechanism::root());
        } else {
            std::vector<double> w(arity);
            for (double& wi : w) wi = rng.uniform(-1.5, 1.5);
            mechs.push_back(Mechanism::linear(std::move(w)));
        }
    }
    std::vector<ErrorDistribution> dists(6, ErrorDistribution::laplace(0.0, 1.0));
    const Scm scm(g, mechs, dists);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> probe(6);
        for (double& v : probe) v = rng.laplace(0.0, 1.0);
        const auto back = scm.invert(scm.push_forward(probe));
        for (std::size_t i = 0; i < probe.size(); ++i) {
            worst = std::max(worst, std::abs(back[i] - probe[i]));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("additive mechanisms evaluate and invert") {
    CausalGraph graph({"X1", "X2"}, {{0, 1}});
    rca::AdditiveTerm term;
    term.primitive = rca::Primitive::tanh_squash;
    term.weights = {2.0};
    term.bias = 0.1;
    term.scale = 1.5;
    Scm scm(graph, {Mechanism::root(), Mechanism::additive({term})},
            {ErrorDistribution::gaussian(0.0, 1.0), ErrorDistribution::gaussian(0.0, 1.0)});
    const auto x = scm.push_forward(std::vector<double>{0.4, -0.2});
    CHECK(x[1] == doctest::Approx(1.5 * std::tanh(0.1 + 2.0 * 0.4) - 0.2).epsilon(1e-15));
    const auto e = scm.invert(x);
    CHECK(e[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(e[1] == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(scm.is_invertible());
}

TEST_CASE("label probability flows through the logistic mechanism") {
    const Scm funnel = fixtures::funnel_linear();
    const auto x = funnel.push_forward(std::vector<double>{1.0, 0.0, 0.0, 0.0});
    // x4 = 1, so P(D=1|x) = sigmoid(-2 + 1.6).
    CHECK(funnel.label_probability(x) == doctest::Approx(rca::sigmoid(-0.4)).epsilon(1e-15));

    // A model without a diagnosis refuses label queries.
    const Scm chain = fixtures::chain_linear();
    CHECK_THROWS_AS(chain.label_probability(std::vector<double>{0.0, 0.0}), rca::UnsupportedError);
}

TEST_CASE("sampling is deterministic and thread-count independent") {
    const Scm funnel = fixtures::funnel_linear();
    const auto a = funnel.sample(500, 99, 1);
    const auto b = funnel.sample(500, 99, 1);
    const auto c = funnel.sample(500, 99, 4);
    CHECK(a.x.data == b.x.data);
    CHECK(a.e.data == b.e.data);
    CHECK(a.labels == b.labels);
    CHECK(a.x.data == c.x.data);
    CHECK(a.e.data == c.e.data);
    CHECK(a.labels == c.labels);
    // Different seeds must differ.
    const auto d = funnel.sample(500, 100, 1);
    CHECK(a.e.data != d.e.data);
    CHECK_THROWS_AS(funnel.sample(0, 1), rca::ModelError);
}

TEST_CASE("sampling matches its declared marginals and label mechanism") {
    const Scm funnel = fixtures::funnel_linear();
    const std::size_t n = 20000;
    const auto data = funnel.sample(n, 7);
    REQUIRE(data.rows() == n);
    REQUIRE(data.labels.size() == n);

    // Each error coordinate: mean/variance within 5 standard errors.
    for (std::size_t c = 0; c < 4; ++c) {
        const auto col = data.e.column(c);
        CHECK(std::abs(rca::mean(col)) < 5.0 / std::sqrt(static_cast<double>(n)));
        CHECK(rca::variance(col) == doctest::Approx(1.0).epsilon(0.1));
    }

    // Sampled x equals push_forward of sampled e, row for row.
    for (std::size_t r = 0; r < 50; ++r) {
        const auto x = funnel.push_forward(data.e.row(r));
        for (std::size_t c = 0; c < 4; ++c) CHECK(x[c] == data.x.at(r, c));
    }

    // Empirical label rate tracks the mean label probability.
    double expected = 0.0;
    double observed = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        expected += funnel.label_probability(data.x.row(r));
        observed += data.labels[r];
    }
    expected /= static_cast<double>(n);
    observed /= static_cast<double>(n);
    CHECK(observed == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("root-only model samples x equal to e") {
    CausalGraph roots({"A", "B"}, {});
    Scm scm(roots, {Mechanism::root(), Mechanism::root()},
            {ErrorDistribution::uniform(0.0, 1.0), ErrorDistribution::laplace(0.0, 1.0)});
    const auto data = scm.sample(200, 3);
    CHECK(data.x.data == data.e.data);
    CHECK(data.labels.empty());
}

TEST_CASE("discrete joint probability factorizes over coordinates") {
    const Scm or_scm = fixtures::or_model();
    CHECK(or_scm.is_discrete());
    CHECK(or_scm.error_prob(std::vector<double>{0.0, 0.0}) == doctest::Approx(0.25));
    CHECK(or_scm.error_prob(std::vector<double>{1.0, 1.0}) == doctest::Approx(0.25));
    CHECK(or_scm.error_prob(std::vector<double>{1.0, 5.0}) == 0.0);

    const Scm funnel = fixtures::funnel_linear();
    CHECK_FALSE(funnel.is_discrete());
    CHECK_THROWS_AS(funnel.error_prob(std::vector<double>{0, 0, 0, 0}), rca::UnsupportedError);
}

TEST_CASE("clamped errors pin coordinates across push, sample, and marginals") {
    const Scm or_scm = fixtures::or_model();
    const Scm clamped = or_scm.with_clamped_errors({{1, 1.0}});
    CHECK(clamped.is_clamped(1));
    CHECK_FALSE(clamped.is_clamped(0));

    // push_forward ignores the supplied entry at the clamped coordinate.
    const auto x = clamped.push_forward(std::vector<double>{0.0, 0.0});
    CHECK(x[1] == 1.0);

    // Sampling draws the constant.
    const auto data = clamped.sample(100, 5);
    for (std::size_t r = 0; r < 100; ++r) CHECK(data.e.at(r, 1) == 1.0);

    // The coordinate's marginal is a point mass.
    CHECK(clamped.error_dists()[1].prob_of(1.0) == 1.0);
    CHECK(clamped.error_dists()[1].prob_of(0.0) == 0.0);
}

TEST_CASE("coordinate mappings skip the diagnosis node") {
    const Scm or_scm = fixtures::or_model();
    CHECK(or_scm.num_vars() == 3);
    CHECK(or_scm.num_errors() == 2);
    CHECK(or_scm.coord_of_var(0) == 0);
    CHECK(or_scm.coord_of_var(1) == 1);
    CHECK(or_scm.var_of_coord(1) == 1);
    CHECK(or_scm.coord_name(0) == "X1");
    CHECK(or_scm.coord_names() == std::vector<std::string>{"X1", "X2"});
}

TEST_CASE("serialization round-trips losslessly") {
    for (const Scm& scm : {fixtures::or_model(), fixtures::funnel_linear()}) {
        const auto j = rca::scm_to_json(scm);
        const Scm back = rca::scm_from_json(j);
        CHECK(rca::scm_to_json(back).dump() == j.dump());
        // Behavior survives the round trip.
        std::vector<double> e(scm.num_errors(), 1.0);
        CHECK(back.push_forward(e) == scm.push_forward(e));
    }

    // Additive mechanisms serialize too.
    CausalGraph graph({"X1", "X2"}, {{0, 1}});
    rca::AdditiveTerm term;
    term.primitive = rca::Primitive::quadratic;
    term.weights = {0.7};
    term.bias = -0.2;
    term.scale = 2.0;
    Scm scm(graph, {Mechanism::root(), Mechanism::additive({term})},
            {ErrorDistribution::uniform(-1.0, 1.0),
             ErrorDistribution::discrete({-1.0, 1.0}, {0.4, 0.6})});
    const auto j = rca::scm_to_json(scm);
    CHECK(rca::scm_to_json(rca::scm_from_json(j)).dump() == j.dump());

    // Malformed documents are rejected loudly.
    CHECK_THROWS_AS(rca::scm_from_json(nlohmann::json::object()), rca::ConfigError);
}
