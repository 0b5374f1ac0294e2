#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "rca/attribution.hpp"
#include "rca/bench.hpp"
#include "rca/counterfactual.hpp"
#include "rca/diagnosis.hpp"
#include "rca/serialize.hpp"
#include "support.hpp"

using rca::CeMode;
using rca::CeOptions;
using rca::DetectionReport;
using rca::InjectionPolicy;
using rca::Matrix;
using rca::MechanismFamily;
using rca::PipelineConfig;
using rca::Rng;
using rca::Scenario;
using rca::ScenarioConfig;

namespace {

ScenarioConfig small_cfg(std::uint64_t seed, double magnitude = 4.0) {
    ScenarioConfig cfg;
    cfg.p = 4;
    cfg.family = MechanismFamily::linear_laplace;
    cfg.n_train = 3000;
    cfg.n_patients = 50;
    cfg.magnitude = magnitude;
    cfg.seed = seed;
    return cfg;
}

PipelineConfig fast_pipeline(std::uint64_t seed) {
    PipelineConfig cfg;
    cfg.background_cap = 256;
    cfg.seed = seed;
    cfg.threads = 2;
    return cfg;
}

void check_report_sane(const DetectionReport& rep, std::size_t patients, std::size_t top_k) {
    CHECK(rep.patients == patients);
    CHECK(rep.top_k == top_k);
    for (double v : {rep.top1_ehat, rep.topk_ehat, rep.top1_oracle, rep.topk_oracle}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(rep.mrr_ehat > 0.0);
    CHECK(rep.mrr_ehat <= 1.0);
    CHECK(rep.mrr_oracle > 0.0);
    CHECK(rep.mrr_oracle <= 1.0);
    CHECK(rep.topk_ehat >= rep.top1_ehat);
    CHECK(rep.topk_oracle >= rep.top1_oracle);
    CHECK(rep.mrr_ehat >= rep.top1_ehat);
    CHECK(rep.mrr_oracle >= rep.top1_oracle);
    CHECK(std::isfinite(rep.rmse_ehat));
    CHECK(rep.rmse_ehat >= 0.0);
    CHECK(std::isfinite(rep.s_gap_mean));
    CHECK(rep.s_gap_mean >= 0.0);
    CHECK(rep.per_patient_rank_ehat.size() == patients);
    CHECK(rep.per_patient_rank_oracle.size() == patients);
}

}  // namespace

TEST_CASE("scenario configuration names round-trip") {
    for (MechanismFamily f : {MechanismFamily::linear_laplace, MechanismFamily::additive_tanh,
                              MechanismFamily::discrete_binary}) {
        CHECK(rca::family_from_string(rca::to_string(f)) == f);
    }
    for (InjectionPolicy p : {InjectionPolicy::ancestor_coordinate, InjectionPolicy::root_vertex}) {
        CHECK(rca::injection_policy_from_string(rca::to_string(p)) == p);
    }
    CHECK_THROWS_AS(rca::family_from_string("quadratic-cauchy"), rca::ConfigError);
    CHECK_THROWS_AS(rca::injection_policy_from_string("leaf"), rca::ConfigError);
}

TEST_CASE("scenario validation rejects bad configurations") {
    ScenarioConfig cfg = small_cfg(1);
    cfg.magnitude = 0.0;
    CHECK_THROWS_AS(rca::generate_scenario(cfg), rca::ConfigError);

    cfg = small_cfg(1);
    cfg.p = 1;
    CHECK_THROWS_AS(rca::generate_scenario(cfg), rca::ConfigError);

    cfg = small_cfg(1);
    cfg.n_train = 0;
    CHECK_THROWS_AS(rca::generate_scenario(cfg), rca::ConfigError);

    cfg = small_cfg(1);
    cfg.label_weight_lo = 0.0;
    CHECK_THROWS_AS(rca::generate_scenario(cfg), rca::ConfigError);

    cfg = small_cfg(1);
    cfg.mech_weight_lo = 1.0;
    cfg.mech_weight_hi = 0.5;
    CHECK_THROWS_AS(rca::generate_scenario(cfg), rca::ConfigError);
}

TEST_CASE("scenario generation is deterministic in the seed") {
    ScenarioConfig cfg = small_cfg(11);
    cfg.n_train = 500;
    cfg.n_patients = 20;
    const Scenario a = rca::generate_scenario(cfg, 1);
    const Scenario b = rca::generate_scenario(cfg, 4);  // thread count is irrelevant
    CHECK(rca::scm_to_json(a.scm).dump() == rca::scm_to_json(b.scm).dump());
    CHECK(a.train.x.data == b.train.x.data);
    CHECK(a.train.e.data == b.train.e.data);
    CHECK(a.train.labels == b.train.labels);
    CHECK(a.patient_e.data == b.patient_e.data);
    CHECK(a.patient_x.data == b.patient_x.data);
    CHECK(a.truth == b.truth);

    cfg.seed = 12;
    const Scenario c = rca::generate_scenario(cfg, 1);
    CHECK(a.train.x.data != c.train.x.data);
}

TEST_CASE("injected patients carry the documented deviation") {
    ScenarioConfig cfg = small_cfg(21);
    cfg.n_train = 200;
    cfg.n_patients = 30;
    const Scenario sc = rca::generate_scenario(cfg);

    for (std::size_t r = 0; r < cfg.n_patients; ++r) {
        const std::size_t t = sc.truth[r];
        REQUIRE(t < sc.scm.num_errors());
        // Unit-variance laplace at magnitude four: the injected error is 4.
        CHECK(sc.patient_e.at(r, t) == doctest::Approx(4.0).epsilon(1e-9));
        // Patients are pushed through the generating mechanisms.
        const auto x = sc.scm.push_forward(sc.patient_e.row(r));
        for (std::size_t c = 0; c < x.size(); ++c) {
            CHECK(sc.patient_x.at(r, c) == x[c]);
        }
        // Truth respects the ancestor-coordinate policy.
        const std::size_t var = sc.scm.var_of_coord(t);
        CHECK(sc.scm.graph().ancestors(sc.scm.graph().diagnosis())[var]);
    }

    // Discrete injections pin the maximal support value.
    ScenarioConfig dcfg = small_cfg(22);
    dcfg.family = MechanismFamily::discrete_binary;
    dcfg.n_train = 200;
    dcfg.n_patients = 20;
    const Scenario dsc = rca::generate_scenario(dcfg);
    for (std::size_t r = 0; r < dcfg.n_patients; ++r) {
        CHECK(dsc.patient_e.at(r, dsc.truth[r]) == 1.0);
    }
}

TEST_CASE("root-vertex policy only injects root coordinates in the label cone") {
    ScenarioConfig cfg = small_cfg(31);
    cfg.policy = InjectionPolicy::root_vertex;
    cfg.n_train = 200;
    cfg.n_patients = 40;
    const Scenario sc = rca::generate_scenario(cfg);
    const auto anc = sc.scm.graph().ancestors(sc.scm.graph().diagnosis());
    for (std::size_t r = 0; r < cfg.n_patients; ++r) {
        const std::size_t var = sc.scm.var_of_coord(sc.truth[r]);
        CHECK(sc.scm.graph().parents(var).empty());
        CHECK(anc[var]);
    }
}

TEST_CASE("discrete scenarios satisfy the counterfactual equivalences") {
    ScenarioConfig cfg = small_cfg(41);
    cfg.family = MechanismFamily::discrete_binary;
    cfg.n_train = 100;
    cfg.n_patients = 5;
    const Scenario sc = rca::generate_scenario(cfg);
    REQUIRE(sc.scm.is_discrete());

    double worst = 0.0;
    rca::for_each_error_state(sc.scm, [&](std::span<const double> e, double) {
        for (const auto& V : oracle::all_subsets(sc.scm.num_errors())) {
            const auto rep = rca::verify_equivalence(sc.scm, e, V);
            worst = std::max(worst, rep.max_abs_diff);
        }
    });
    CHECK(worst < 1e-12);
}

TEST_CASE("a non-ancestor injection earns a zero oracle score") {
    ScenarioConfig cfg = small_cfg(51);
    cfg.p = 5;
    cfg.edge_prob = 0.3;
    cfg.label_density = 0.5;
    cfg.force_non_ancestor = true;
    cfg.n_train = 400;
    cfg.n_patients = 25;
    const Scenario sc = rca::generate_scenario(cfg);

    // Certify the premise: no injected variable is an ancestor of D.
    const auto anc = sc.scm.graph().ancestors(sc.scm.graph().diagnosis());
    for (std::size_t t : sc.truth) CHECK_FALSE(anc[sc.scm.var_of_coord(t)]);

    // Oracle-side attribution mirrors the detection pipeline's oracle arm.
    Matrix bg(256, sc.scm.num_errors());
    for (std::size_t r = 0; r < bg.rows; ++r) {
        const auto src = sc.train.e.row(r);
        std::copy(src.begin(), src.end(), bg.row(r).begin());
    }
    const auto oracle_model =
        rca::DiagnosisModel::exact_synthetic(sc.scm).with_background(std::move(bg));
    CeOptions ce;
    ce.mode = CeMode::background_rows;
    ce.seed = 99;
    double worst = 0.0;
    for (std::size_t r = 0; r < cfg.n_patients; ++r) {
        const auto res =
            rca::shapley_exact(oracle_model, sc.patient_e.row(r), rca::Transform::logit(), ce);
        worst = std::max(worst, std::abs(res.s[sc.truth[r]]));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("detection on a hand-built funnel pins the injected coordinate") {
    Scenario sc{fixtures::funnel_linear(), {}, {}, {}, {}};
    sc.train = sc.scm.sample(8000, 71, 2);
    const std::size_t n_pat = 40;
    const std::size_t p = sc.scm.num_errors();
    sc.patient_e = Matrix(n_pat, p);
    sc.patient_x = Matrix(n_pat, p);
    sc.truth.assign(n_pat, 0);
    Rng rng(73);
    for (std::size_t r = 0; r < n_pat; ++r) {
        auto erow = sc.patient_e.row(r);
        for (std::size_t c = 0; c < p; ++c) erow[c] = rng.gaussian(0.0, 1.0);
        erow[0] = 4.0;  // the root cause: X1's error at four standard deviations
        const auto x = sc.scm.push_forward(erow);
        std::copy(x.begin(), x.end(), sc.patient_x.row(r).begin());
    }

    PipelineConfig cfg = fast_pipeline(5);
    cfg.background_cap = 512;
    const DetectionReport rep = rca::run_detection(sc, cfg);
    check_report_sane(rep, n_pat, cfg.top_k);
    CHECK(rep.top1_oracle >= 0.9);
    CHECK(rep.top1_ehat >= 0.8);
    CHECK(rep.rmse_ehat < 0.05);
    CHECK(rep.s_gap_mean < 0.5);

    // The whole pipeline is deterministic: rerunning reproduces every field.
    const DetectionReport again = rca::run_detection(sc, cfg);
    CHECK(rep.top1_ehat == again.top1_ehat);
    CHECK(rep.mrr_ehat == again.mrr_ehat);
    CHECK(rep.rmse_ehat == again.rmse_ehat);
    CHECK(rep.s_gap_mean == again.s_gap_mean);
    CHECK(rep.per_patient_rank_ehat == again.per_patient_rank_ehat);
    CHECK(rep.per_patient_rank_oracle == again.per_patient_rank_oracle);
}

TEST_CASE("detection strengthens with the injection magnitude") {
    std::vector<double> top1;
    for (double mag : {1.0, 2.0, 4.0}) {
        const Scenario sc = rca::generate_scenario(small_cfg(61, mag), 2);
        const DetectionReport rep = rca::run_detection(sc, fast_pipeline(7));
        check_report_sane(rep, 50, 3);
        top1.push_back(rep.top1_oracle);
    }
    CHECK(top1[0] <= top1[1] + 0.12);
    CHECK(top1[1] <= top1[2] + 0.12);
    CHECK(top1[2] >= 0.8);
}

TEST_CASE("an empty scenario is rejected by the pipeline") {
    Scenario sc{fixtures::funnel_linear(), {}, {}, {}, {}};
    sc.train = sc.scm.sample(100, 3);
    CHECK_THROWS_AS(rca::run_detection(sc, fast_pipeline(1)), rca::ModelError);
}
