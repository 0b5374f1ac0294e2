#include "rca/bench.hpp"

#include <algorithm>
#include <cmath>

#include "rca/diagnosis.hpp"

namespace rca {

std::string to_string(MechanismFamily f) {
    switch (f) {
        case MechanismFamily::linear_laplace: return "linear-laplace";
        case MechanismFamily::additive_tanh: return "additive-tanh";
        case MechanismFamily::discrete_binary: return "discrete-binary";
    }
    throw ModelError("unreachable mechanism family");
}

MechanismFamily family_from_string(const std::string& s) {
    if (s == "linear-laplace") return MechanismFamily::linear_laplace;
    if (s == "additive-tanh") return MechanismFamily::additive_tanh;
    if (s == "discrete-binary") return MechanismFamily::discrete_binary;
    throw ConfigError("unknown mechanism family: " + s);
}

std::string to_string(InjectionPolicy p) {
    switch (p) {
        case InjectionPolicy::ancestor_coordinate: return "ancestor-coordinate";
        case InjectionPolicy::root_vertex: return "root-vertex";
    }
    throw ModelError("unreachable injection policy");
}

InjectionPolicy injection_policy_from_string(const std::string& s) {
    if (s == "ancestor-coordinate") return InjectionPolicy::ancestor_coordinate;
    if (s == "root-vertex") return InjectionPolicy::root_vertex;
    throw ConfigError("unknown injection policy: " + s);
}

namespace {

// Laplace scale for unit error variance.
constexpr double kUnitLaplaceScale = 0.70710678118654752440;

Scm realize_scm(const ScenarioConfig& cfg, Rng& rng, std::vector<std::size_t>& candidates) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        // X-layer: permutation order plus forward edges, capped at 3 parents.
        const CausalGraph xg = random_dag(cfg.p, cfg.edge_prob, 3, rng);
        std::vector<std::string> names = xg.names();
        names.push_back("D");
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t v = 0; v < cfg.p; ++v) {
            for (std::size_t c : xg.children(v)) edges.emplace_back(v, c);
        }
        std::vector<std::size_t> label_parents;
        for (std::size_t v = 0; v < cfg.p; ++v) {
            if (rng.uniform01() < cfg.label_density) label_parents.push_back(v);
        }
        if (label_parents.empty()) continue;
        for (std::size_t v : label_parents) edges.emplace_back(v, cfg.p);
        CausalGraph graph(names, edges, cfg.p);

        std::vector<Mechanism> mechanisms;
        std::vector<ErrorDistribution> dists;
        auto draw_label_weight = [&rng, &cfg] {
            return rng.uniform(cfg.label_weight_lo, cfg.label_weight_hi);
        };
        auto draw_mech_weight = [&rng, &cfg] {
            return rng.uniform(cfg.mech_weight_lo, cfg.mech_weight_hi);
        };
        for (std::size_t v = 0; v < cfg.p; ++v) {
            const std::size_t arity = graph.parents(v).size();
            if (arity == 0) {
                mechanisms.push_back(Mechanism::root());
            } else if (cfg.family == MechanismFamily::additive_tanh) {
                // One squashing term per parent keeps the map additive in E.
                std::vector<AdditiveTerm> terms;
                for (std::size_t k = 0; k < arity; ++k) {
                    AdditiveTerm t;
                    t.primitive = Primitive::tanh_squash;
                    t.weights.assign(arity, 0.0);
                    t.weights[k] = draw_mech_weight();
                    t.bias = 0.0;
                    t.scale = draw_mech_weight();
                    terms.push_back(std::move(t));
                }
                mechanisms.push_back(Mechanism::additive(std::move(terms)));
            } else {
                std::vector<double> w(arity);
                for (double& wk : w) wk = draw_mech_weight();
                mechanisms.push_back(Mechanism::linear(std::move(w)));
            }
            if (cfg.family == MechanismFamily::discrete_binary) {
                dists.push_back(ErrorDistribution::discrete({0.0, 1.0}, {0.5, 0.5}));
            } else {
                dists.push_back(ErrorDistribution::laplace(0.0, kUnitLaplaceScale));
            }
        }
        {
            std::vector<double> lw(graph.parents(cfg.p).size());
            for (double& wk : lw) wk = draw_label_weight();
            mechanisms.push_back(Mechanism::logistic(cfg.label_intercept, std::move(lw)));
        }
        Scm scm(std::move(graph), std::move(mechanisms), std::move(dists));

        // Injection candidates relative to the D-ancestor cone.
        const std::vector<bool> anc = scm.graph().ancestors(cfg.p);
        candidates.clear();
        for (std::size_t v = 0; v < cfg.p; ++v) {
            const bool is_root = scm.graph().parents(v).empty();
            const bool in_cone = anc[v];
            const bool wanted = cfg.force_non_ancestor
                ? !in_cone
                : (cfg.policy == InjectionPolicy::root_vertex ? (is_root && in_cone) : in_cone);
            if (wanted) candidates.push_back(scm.coord_of_var(v));
        }
        if (!candidates.empty()) return scm;
    }
    throw ConfigError("could not realize a scenario graph with valid injection targets");
}

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg, int threads) {
    if (cfg.p < 2) throw ConfigError("scenario requires p >= 2");
    if (cfg.magnitude <= 0.0) throw ConfigError("injection magnitude must be positive");
    if (cfg.n_train == 0 || cfg.n_patients == 0) {
        throw ConfigError("scenario requires n_train >= 1 and n_patients >= 1");
    }
    if (cfg.label_weight_lo <= 0.0 || cfg.label_weight_hi < cfg.label_weight_lo) {
        throw ConfigError("label weight range must satisfy 0 < lo <= hi");
    }
    if (cfg.mech_weight_lo <= 0.0 || cfg.mech_weight_hi < cfg.mech_weight_lo) {
        throw ConfigError("mechanism weight range must satisfy 0 < lo <= hi");
    }

    Rng rng(derive_seed(cfg.seed, 0));
    std::vector<std::size_t> candidates;
    Scenario sc{realize_scm(cfg, rng, candidates), {}, {}, {}, {}};

    sc.train = sc.scm.sample(cfg.n_train, derive_seed(cfg.seed, 1), threads);

    const std::size_t p = sc.scm.num_errors();
    sc.patient_e = Matrix(cfg.n_patients, p);
    sc.patient_x = Matrix(cfg.n_patients, p);
    sc.truth.assign(cfg.n_patients, 0);
    for (std::size_t r = 0; r < cfg.n_patients; ++r) {
        Rng prng(derive_seed(cfg.seed, 1000003 + r));
        auto erow = sc.patient_e.row(r);
        for (std::size_t c = 0; c < p; ++c) erow[c] = sc.scm.error_dists()[c].sample(prng);
        const std::size_t target = candidates[prng.index(candidates.size())];
        const ErrorDistribution& dist = sc.scm.error_dists()[target];
        if (dist.is_discrete()) {
            // Discrete coordinates take their maximal support value.
            erow[target] = dist.support().back();
        } else {
            erow[target] = dist.mean() + cfg.magnitude * dist.stddev();
        }
        sc.truth[r] = target;
        const std::vector<double> x = sc.scm.push_forward(erow);
        std::copy(x.begin(), x.end(), sc.patient_x.row(r).begin());
    }
    return sc;
}

namespace {

struct RankStats {
    double top1 = 0.0;
    double topk = 0.0;
    double mrr = 0.0;
    std::vector<double> ranks;
};

}  // namespace

DetectionReport run_detection(const Scenario& scenario, const PipelineConfig& cfg) {
    const Scm& scm = scenario.scm;
    const std::size_t p = scm.num_errors();
    const std::size_t n_pat = scenario.patient_e.rows;
    if (n_pat == 0) throw ModelError("scenario has no patients");

    // Stage: extraction (fit on training x, apply to patients).
    ExtractionConfig ext = cfg.extraction;
    ext.threads = cfg.threads;
    Extractor extractor = [&] {
        try {
            return Extractor::fit(scenario.train.x, scm.graph(), ext);
        } catch (const Error& e) {
            throw ModelError(std::string("extract stage: ") + e.what());
        }
    }();
    const Matrix train_ehat = extractor.training().e_hat;
    const Matrix patient_ehat = [&] {
        try {
            return extractor.residuals(scenario.patient_x);
        } catch (const Error& e) {
            throw ModelError(std::string("extract stage: ") + e.what());
        }
    }();

    // Stage: fit P(D|E) on extracted errors.
    const DiagnosisModel fitted = [&] {
        try {
            return fit_logistic(train_ehat, scenario.train.labels, cfg.l2, cfg.fit_max_iter,
                                cfg.fit_tol, cfg.background_cap);
        } catch (const Error& e) {
            throw ModelError(std::string("fit stage: ") + e.what());
        }
    }();

    // Oracle model: the generating mechanisms plus true-error background.
    const DiagnosisModel oracle = [&] {
        Matrix bg(std::min<std::size_t>(scenario.train.e.rows, cfg.background_cap), p);
        for (std::size_t r = 0; r < bg.rows; ++r) {
            const auto src = scenario.train.e.row(r);
            std::copy(src.begin(), src.end(), bg.row(r).begin());
        }
        return DiagnosisModel::exact_synthetic(scm).with_background(std::move(bg));
    }();

    const CeOptions ce{CeMode::background_rows, 10000, cfg.seed};

    RankStats ehat_stats, oracle_stats;
    ehat_stats.ranks.resize(n_pat);
    oracle_stats.ranks.resize(n_pat);
    std::vector<double> gaps(n_pat, 0.0);

    std::vector<AttributionResult> ehat_res(n_pat), oracle_res(n_pat);
    parallel_for(n_pat, cfg.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            try {
                ehat_res[r] = shapley_exact(fitted, patient_ehat.row(r), cfg.transform, ce);
                oracle_res[r] = shapley_exact(oracle, scenario.patient_e.row(r), cfg.transform, ce);
            } catch (const Error& e) {
                throw ModelError(std::string("attribute stage: ") + e.what());
            }
        }
    });

    auto score = [&](const std::vector<AttributionResult>& res, RankStats& st) {
        double top1 = 0.0, topk = 0.0, mrr = 0.0;
        for (std::size_t r = 0; r < n_pat; ++r) {
            const std::vector<std::size_t> order = ranked_coords(res[r]);
            std::size_t rank = p;
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (order[i] == scenario.truth[r]) {
                    rank = i + 1;
                    break;
                }
            }
            st.ranks[r] = static_cast<double>(rank);
            if (rank == 1) top1 += 1.0;
            if (rank <= cfg.top_k) topk += 1.0;
            mrr += 1.0 / static_cast<double>(rank);
        }
        const double n = static_cast<double>(n_pat);
        st.top1 = top1 / n;
        st.topk = topk / n;
        st.mrr = mrr / n;
    };
    score(ehat_res, ehat_stats);
    score(oracle_res, oracle_stats);

    for (std::size_t r = 0; r < n_pat; ++r) {
        double gap = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
            gap = std::max(gap, std::abs(ehat_res[r].s[c] - oracle_res[r].s[c]));
        }
        gaps[r] = gap;
    }

    DetectionReport rep;
    rep.patients = n_pat;
    rep.top_k = cfg.top_k;
    rep.top1_ehat = ehat_stats.top1;
    rep.topk_ehat = ehat_stats.topk;
    rep.mrr_ehat = ehat_stats.mrr;
    rep.top1_oracle = oracle_stats.top1;
    rep.topk_oracle = oracle_stats.topk;
    rep.mrr_oracle = oracle_stats.mrr;
    rep.per_patient_rank_ehat = ehat_stats.ranks;
    rep.per_patient_rank_oracle = oracle_stats.ranks;

    double rmse_sum = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
        rmse_sum += rmse(patient_ehat.column(c), scenario.patient_e.column(c));
    }
    rep.rmse_ehat = rmse_sum / static_cast<double>(p);
    rep.s_gap_mean = mean(gaps);
    return rep;
}

}  // namespace rca
