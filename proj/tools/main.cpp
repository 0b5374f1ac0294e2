// rca: batch front door for the root-cause attribution pipeline.
//
// Subcommands: simulate | extract | fit | attribute | verify | bench.
// Exit codes: 0 success, 2 configuration/user error, 3 pipeline error.
// Data goes only to files under --output; logs go to standard error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rca/attribution.hpp"
#include "rca/bench.hpp"
#include "rca/common.hpp"
#include "rca/config.hpp"
#include "rca/counterfactual.hpp"
#include "rca/csv.hpp"
#include "rca/diagnosis.hpp"
#include "rca/extraction.hpp"
#include "rca/scm.hpp"
#include "rca/serialize.hpp"

namespace {

using nlohmann::json;

void log_line(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cerr << "[rca] cmd=" << cmd;
    for (const auto& [k, v] : kv) std::cerr << ' ' << k << '=' << v;
    std::cerr << '\n';
}

struct CommonArgs {
    std::string config_path;
    std::string output;
    std::string transform;
    std::string estimator;
    std::uint64_t seed = 0;
    int threads = 0;
    CLI::Option* config_opt = nullptr;
    CLI::Option* output_opt = nullptr;
    CLI::Option* transform_opt = nullptr;
    CLI::Option* estimator_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;
};

CommonArgs* add_common(CLI::App* cmd, bool with_transform, bool with_estimator) {
    auto args = std::make_shared<CommonArgs>();
    args->config_opt = cmd->add_option("--config", args->config_path, "key = value run config");
    args->seed_opt = cmd->add_option("--seed", args->seed, "seed override");
    args->threads_opt = cmd->add_option("--threads", args->threads, "worker cap (0 = auto)");
    args->output_opt = cmd->add_option("--output", args->output, "output directory");
    if (with_transform) {
        args->transform_opt =
            cmd->add_option("--transform", args->transform, "identity | log | logit");
    }
    if (with_estimator) {
        args->estimator_opt =
            cmd->add_option("--estimator", args->estimator, "exact | sampled:PERMS");
    }
    CommonArgs* raw = args.get();
    cmd->parse_complete_callback([args] {});  // keep alive for the app's lifetime
    return raw;
}

// Loads the config file (when given) and applies flag overrides; flags win.
rca::Config load_config(const CommonArgs& a) {
    rca::Config cfg;
    if (a.config_opt->count()) cfg = rca::Config::parse_file(a.config_path);
    if (a.seed_opt->count()) cfg.set("seed", std::to_string(a.seed));
    if (a.threads_opt->count()) cfg.set("threads", std::to_string(a.threads));
    if (a.output_opt->count()) cfg.set("output", a.output);
    if (a.transform_opt && a.transform_opt->count()) cfg.set("transform", a.transform);
    if (a.estimator_opt && a.estimator_opt->count()) cfg.set("estimator", a.estimator);
    return cfg;
}

std::string prepare_output(rca::Config& cfg) {
    const std::string out = cfg.get_string("output", ".");
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw rca::ConfigError("cannot create output directory " + out + ": " + ec.message());
    return out;
}

rca::Scm load_model_file(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        throw rca::ConfigError("model file does not exist: " + path);
    }
    return rca::load_scm(path);
}

void write_manifest(const std::string& cmd, const rca::Config& cfg, const std::string& outdir,
                    std::uint64_t seed, const std::vector<std::string>& outputs) {
    json j;
    j["command"] = cmd;
    j["config_hash"] = cfg.hash_hex();
    j["seed"] = seed;
    j["outputs"] = outputs;
    rca::write_json_file(j, outdir + "/run.json");
}

rca::Matrix drop_label_column(const rca::CsvTable& table, const rca::Scm& scm,
                              const std::string& origin) {
    const std::vector<std::string> want = scm.coord_names();
    const bool labeled = scm.has_diagnosis() && table.has_column(scm.graph().name(scm.graph().diagnosis()));
    if (table.header.size() != want.size() + (labeled ? 1 : 0)) {
        throw rca::ConfigError(origin + ": expected columns " + std::to_string(want.size()) +
                               (scm.has_diagnosis() ? " (+ optional label column)" : "") +
                               ", got " + std::to_string(table.header.size()));
    }
    for (std::size_t c = 0; c < want.size(); ++c) {
        if (table.header[c] != want[c]) {
            throw rca::ConfigError(origin + ": column " + std::to_string(c) + " is '" +
                                   table.header[c] + "', expected '" + want[c] + "'");
        }
    }
    rca::Matrix m(table.values.rows, want.size());
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = table.values.at(r, c);
    }
    return m;
}

struct EstimatorSpec {
    bool sampled = false;
    std::size_t permutations = 0;
    std::string text = "exact";
};

EstimatorSpec parse_estimator(const std::string& s) {
    EstimatorSpec spec;
    spec.text = s;
    if (s == "exact") return spec;
    const std::string prefix = "sampled:";
    if (s.rfind(prefix, 0) == 0) {
        const std::string num = s.substr(prefix.size());
        try {
            const long long p = std::stoll(num);
            if (p >= 2 && std::to_string(p) == num) {
                spec.sampled = true;
                spec.permutations = static_cast<std::size_t>(p);
                return spec;
            }
        } catch (const std::exception&) {
        }
    }
    throw rca::ConfigError("bad estimator '" + s + "': expected exact or sampled:PERMS");
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

int cmd_simulate(const CommonArgs& a) {
    rca::Config cfg = load_config(a);
    const std::string model_path = cfg.get_string("model");
    const std::uint64_t seed = cfg.get_uint("seed", 0);
    const int threads = static_cast<int>(cfg.get_int("threads", 0));
    const std::size_t n = cfg.get_uint("n");
    const std::size_t n_patients = cfg.get_uint("n_patients", 0);
    const std::string inject_coordinate = cfg.get_string("inject_coordinate", "");
    const double inject_magnitude = cfg.get_double("inject_magnitude", 0.0);
    const std::string outdir = prepare_output(cfg);
    cfg.finish();

    if (n == 0) throw rca::ConfigError("simulate: n must be >= 1");
    const rca::Scm scm = load_model_file(model_path);

    const rca::Dataset data = scm.sample(n, seed, threads);
    std::vector<std::string> outputs;

    rca::CsvTable dt;
    dt.header = scm.coord_names();
    if (scm.has_diagnosis()) dt.header.push_back(scm.graph().name(scm.graph().diagnosis()));
    dt.values = rca::Matrix(n, dt.header.size());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < scm.num_errors(); ++c) dt.values.at(r, c) = data.x.at(r, c);
        if (scm.has_diagnosis()) {
            dt.values.at(r, scm.num_errors()) = static_cast<double>(data.labels[r]);
        }
    }
    rca::write_csv(outdir + "/data.csv", dt);
    outputs.push_back("data.csv");

    rca::CsvTable et;
    et.header = scm.coord_names();
    et.values = data.e;
    rca::write_csv(outdir + "/errors.csv", et);
    outputs.push_back("errors.csv");

    if (n_patients > 0) {
        std::optional<std::size_t> target;
        if (!inject_coordinate.empty()) {
            const std::size_t var = scm.graph().index_of(inject_coordinate);
            target = scm.coord_of_var(var);
            if (inject_magnitude <= 0.0 && !scm.error_dists()[*target].is_discrete()) {
                throw rca::ConfigError("simulate: inject_magnitude must be positive");
            }
        }
        rca::Dataset pats = scm.sample(n_patients, rca::derive_seed(seed, 0xBEEF), threads);
        if (target) {
            const rca::ErrorDistribution& dist = scm.error_dists()[*target];
            for (std::size_t r = 0; r < n_patients; ++r) {
                auto erow = pats.e.row(r);
                erow[*target] = dist.is_discrete()
                                    ? dist.support().back()
                                    : dist.mean() + inject_magnitude * dist.stddev();
                const std::vector<double> x = scm.push_forward(erow);
                std::copy(x.begin(), x.end(), pats.x.row(r).begin());
            }
        }
        rca::CsvTable px;
        px.header = scm.coord_names();
        px.values = pats.x;
        rca::write_csv(outdir + "/patients_x.csv", px);
        outputs.push_back("patients_x.csv");

        rca::CsvTable pe;
        pe.header = scm.coord_names();
        pe.values = pats.e;
        rca::write_csv(outdir + "/patients_e.csv", pe);
        outputs.push_back("patients_e.csv");
    }

    write_manifest("simulate", cfg, outdir, seed, outputs);
    log_line("simulate", {{"rows", std::to_string(n)},
                          {"patients", std::to_string(n_patients)},
                          {"out", outdir},
                          {"config_hash", cfg.hash_hex()}});
    return 0;
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

int cmd_extract(const CommonArgs& a) {
    rca::Config cfg = load_config(a);
    const std::string model_path = cfg.get_string("model");
    const std::string data_path = cfg.get_string("data");
    const std::string apply_path = cfg.get_string("apply", "");
    const std::uint64_t seed = cfg.get_uint("seed", 0);

    rca::ExtractionConfig ext;
    ext.mode = rca::extraction_mode_from_string(cfg.get_string("mode", "topdown-linear"));
    ext.smoother = rca::smoother_from_string(cfg.get_string("smoother", "knn-mean"));
    ext.k = cfg.get_uint("k", 0);
    ext.bandwidth = cfg.get_double("bandwidth", 1.0);
    ext.ridge = cfg.get_double("ridge", 0.0);
    ext.threads = static_cast<int>(cfg.get_int("threads", 0));
    const std::string outdir = prepare_output(cfg);
    cfg.finish();

    const rca::Scm scm = load_model_file(model_path);
    const rca::Matrix x = drop_label_column(rca::read_csv(data_path), scm, data_path);

    const rca::Extractor extractor = rca::Extractor::fit(x, scm.graph(), ext);
    std::vector<std::string> outputs;

    rca::CsvTable et;
    et.header = scm.coord_names();
    et.values = extractor.training().e_hat;
    rca::write_csv(outdir + "/ehat.csv", et);
    outputs.push_back("ehat.csv");

    if (!apply_path.empty()) {
        const rca::Matrix ax = drop_label_column(rca::read_csv(apply_path), scm, apply_path);
        rca::CsvTable at;
        at.header = scm.coord_names();
        at.values = extractor.residuals(ax);
        rca::write_csv(outdir + "/ehat_apply.csv", at);
        outputs.push_back("ehat_apply.csv");
    }

    json diag;
    diag["config_hash"] = cfg.hash_hex();
    diag["seed"] = seed;
    diag["mode"] = rca::to_string(ext.mode);
    diag["smoother"] = rca::to_string(ext.smoother);
    diag["k"] = ext.k;
    diag["bandwidth"] = ext.bandwidth;
    diag["ridge"] = ext.ridge;
    diag["rows"] = x.rows;
    diag["residual_variance"] = extractor.training().residual_variance;
    diag["coefficients"] = extractor.training().coefficients;
    rca::write_json_file(diag, outdir + "/extraction.json");
    outputs.push_back("extraction.json");

    write_manifest("extract", cfg, outdir, seed, outputs);
    log_line("extract", {{"rows", std::to_string(x.rows)},
                         {"mode", rca::to_string(ext.mode)},
                         {"out", outdir},
                         {"config_hash", cfg.hash_hex()}});
    return 0;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

int cmd_fit(const CommonArgs& a) {
    rca::Config cfg = load_config(a);
    const std::string errors_path = cfg.get_string("errors");
    const std::string labels_path = cfg.get_string("labels");
    const std::string label_column = cfg.get_string("label_column", "D");
    const double l2 = cfg.get_double("l2", 1e-6);
    const double tol = cfg.get_double("tol", 1e-8);
    const std::size_t max_iter = cfg.get_uint("max_iter", 100);
    const std::size_t background_cap = cfg.get_uint("background_cap", 2048);
    const std::uint64_t seed = cfg.get_uint("seed", 0);
    (void)cfg.get_int("threads", 0);
    const std::string outdir = prepare_output(cfg);
    cfg.finish();

    const rca::CsvTable errors = rca::read_csv(errors_path);
    const rca::CsvTable labels_table = rca::read_csv(labels_path);
    const std::size_t label_col = labels_table.column_index(label_column);
    if (labels_table.values.rows != errors.values.rows) {
        throw rca::ConfigError("fit: errors and labels row counts differ (" +
                               std::to_string(errors.values.rows) + " vs " +
                               std::to_string(labels_table.values.rows) + ")");
    }
    std::vector<int> labels(labels_table.values.rows);
    for (std::size_t r = 0; r < labels.size(); ++r) {
        const double v = labels_table.values.at(r, label_col);
        if (v != 0.0 && v != 1.0) {
            throw rca::ConfigError("fit: label column must be 0/1, found " +
                                   rca::format_double(v) + " at row " + std::to_string(r));
        }
        labels[r] = v == 1.0 ? 1 : 0;
    }

    const rca::DiagnosisModel model =
        rca::fit_logistic(errors.values, labels, l2, max_iter, tol, background_cap);

    json j = model.to_json();
    j["coordinates"] = errors.header;
    j["config_hash"] = cfg.hash_hex();
    j["seed"] = seed;
    rca::write_json_file(j, outdir + "/model.json");
    write_manifest("fit", cfg, outdir, seed, {"model.json"});
    log_line("fit", {{"rows", std::to_string(errors.values.rows)},
                     {"iterations", std::to_string(model.fit_info().iterations)},
                     {"nll", rca::format_double(model.fit_info().nll)},
                     {"out", outdir},
                     {"config_hash", cfg.hash_hex()}});
    return 0;
}

// ---------------------------------------------------------------------------
// attribute
// ---------------------------------------------------------------------------

int cmd_attribute(const CommonArgs& a) {
    rca::Config cfg = load_config(a);
    const std::string model_path = cfg.get_string("model");
    const std::string patients_path = cfg.get_string("patients");
    const rca::Transform transform{
        rca::transform_from_string(cfg.get_string("transform", "logit")), 1e-9};
    const EstimatorSpec estimator = parse_estimator(cfg.get_string("estimator", "exact"));
    const std::size_t mc_samples = cfg.get_uint("mc_samples", 10000);
    const std::uint64_t seed = cfg.get_uint("seed", 0);
    (void)cfg.get_int("threads", 0);
    const std::string outdir = prepare_output(cfg);
    cfg.finish();

    if (!std::filesystem::exists(model_path)) {
        throw rca::ConfigError("model file does not exist: " + model_path);
    }
    const json mj = rca::read_json_file(model_path);
    const rca::DiagnosisModel model = rca::DiagnosisModel::from_json(mj);

    const rca::CsvTable patients = rca::read_csv(patients_path);
    if (patients.header.size() != model.num_coords()) {
        throw rca::ConfigError("attribute: patient columns (" +
                               std::to_string(patients.header.size()) +
                               ") do not match model coordinates (" +
                               std::to_string(model.num_coords()) + ")");
    }
    std::vector<std::string> names = patients.header;
    if (mj.contains("coordinates")) {
        const auto declared = mj.at("coordinates").get<std::vector<std::string>>();
        if (declared != names) {
            throw rca::ConfigError("attribute: patient columns do not match model coordinates");
        }
    }

    rca::CeOptions ce;
    ce.seed = seed;
    ce.mc_samples = mc_samples;
    if (model.kind() == rca::ModelKind::exact_synthetic && model.wrapped_scm().is_discrete()) {
        ce.mode = rca::CeMode::exact;
    } else {
        ce.mode = rca::CeMode::background_rows;
    }

    std::string out;
    for (std::size_t r = 0; r < patients.values.rows; ++r) {
        const rca::AttributionResult res =
            estimator.sampled
                ? rca::shapley_sampled(model, patients.values.row(r), transform,
                                       estimator.permutations, seed, ce)
                : rca::shapley_exact(model, patients.values.row(r), transform, ce);
        json rec;
        rec["patient_id"] = r;
        rec["s"] = res.s;
        rec["phi_total"] = res.phi_total;
        rec["transform"] = rca::to_string(res.transform);
        rec["estimator"] = estimator.text;
        rec["stderr"] = res.stderrs;
        rec["residual_adjusted"] = res.residual_adjusted;
        json ranked = json::array();
        for (const std::size_t c : rca::ranked_coords(res)) ranked.push_back(names[c]);
        rec["ranked_causes"] = ranked;
        rec["model_fingerprint"] = res.model_fingerprint;
        rec["config_hash"] = cfg.hash_hex();
        rec["seed"] = seed;
        out += rec.dump();
        out += '\n';
    }
    {
        const std::string path = outdir + "/scores.jsonl";
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw rca::ConfigError("cannot write " + path);
        f << out;
    }
    write_manifest("attribute", cfg, outdir, seed, {"scores.jsonl"});
    log_line("attribute", {{"patients", std::to_string(patients.values.rows)},
                           {"estimator", estimator.text},
                           {"out", outdir},
                           {"config_hash", cfg.hash_hex()}});
    return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const CommonArgs& a) {
    rca::Config cfg = load_config(a);
    const std::string model_path = cfg.get_string("model");
    const std::string evidence_text = cfg.get_string("evidence");
    const std::string subsets_text = cfg.get_string("subsets", "");
    const bool has_subsets = cfg.contains("subsets") || !subsets_text.empty();
    const double tolerance = cfg.get_double("tolerance", 1e-9);
    const std::uint64_t seed = cfg.get_uint("seed", 0);
    (void)cfg.get_int("threads", 0);
    const std::string outdir = prepare_output(cfg);
    cfg.finish();

    const rca::Scm scm = load_model_file(model_path);
    if (!scm.has_diagnosis()) throw rca::ConfigError("verify: model has no diagnosis node");
    if (!scm.is_discrete()) {
        throw rca::ConfigError("verify: equivalence checks need a discrete model");
    }
    const std::size_t p = scm.num_errors();
    if (p > 12) throw rca::ConfigError("verify: model too large for enumeration (p > 12)");

    std::vector<double> evidence;
    {
        std::stringstream ss(evidence_text);
        std::string cell;
        while (std::getline(ss, cell, ',')) evidence.push_back(std::stod(cell));
    }
    if (evidence.size() != p) {
        throw rca::ConfigError("verify: evidence needs " + std::to_string(p) + " values, got " +
                               std::to_string(evidence.size()));
    }

    std::vector<std::vector<std::size_t>> subsets;
    if (has_subsets) {
        std::stringstream ss(subsets_text);
        std::string segment;
        while (std::getline(ss, segment, ';')) {
            std::vector<std::size_t> V;
            std::stringstream seg(segment);
            std::string name;
            while (std::getline(seg, name, ',')) {
                if (name.empty()) continue;
                V.push_back(scm.coord_of_var(scm.graph().index_of(name)));
            }
            subsets.push_back(std::move(V));
        }
        if (subsets.empty()) subsets.push_back({});
    } else {
        for (std::size_t mask = 0; mask < (std::size_t{1} << p); ++mask) {
            std::vector<std::size_t> V;
            for (std::size_t c = 0; c < p; ++c) {
                if (mask & (std::size_t{1} << c)) V.push_back(c);
            }
            subsets.push_back(std::move(V));
        }
    }

    json report;
    report["config_hash"] = cfg.hash_hex();
    report["seed"] = seed;
    report["tolerance"] = tolerance;
    report["evidence"] = evidence;
    double max_abs_diff = 0.0;
    json eq5 = json::array();
    bool first = true;
    for (const auto& V : subsets) {
        const rca::EquivalenceReport r = rca::verify_equivalence(scm, evidence, V);
        if (first) {
            json eq4;
            eq4["lhs"] = r.lhs4;
            eq4["rhs"] = r.rhs4;
            eq4["diff"] = std::abs(r.lhs4 - r.rhs4);
            report["eq4"] = eq4;
            first = false;
        }
        json entry;
        json names = json::array();
        for (const std::size_t c : V) names.push_back(scm.coord_name(c));
        entry["V"] = names;
        entry["lhs"] = r.lhs5;
        entry["rhs"] = r.rhs5;
        entry["diff"] = std::abs(r.lhs5 - r.rhs5);
        eq5.push_back(entry);
        max_abs_diff = std::max(max_abs_diff, r.max_abs_diff);
    }
    report["eq5"] = eq5;
    report["max_abs_diff"] = max_abs_diff;
    report["pass"] = max_abs_diff <= tolerance;
    rca::write_json_file(report, outdir + "/verify.json");
    write_manifest("verify", cfg, outdir, seed, {"verify.json"});
    log_line("verify", {{"subsets", std::to_string(subsets.size())},
                        {"max_abs_diff", rca::format_double(max_abs_diff)},
                        {"pass", report["pass"].get<bool>() ? "true" : "false"},
                        {"out", outdir},
                        {"config_hash", cfg.hash_hex()}});
    return 0;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

int cmd_bench(const CommonArgs& a) {
    rca::Config cfg = load_config(a);
    rca::ScenarioConfig sc;
    sc.p = cfg.get_uint("p", 5);
    sc.edge_prob = cfg.get_double("edge_prob", 0.4);
    sc.family = rca::family_from_string(cfg.get_string("family", "linear-laplace"));
    sc.label_intercept = cfg.get_double("label_intercept", -1.0);
    sc.label_weight_lo = cfg.get_double("label_weight_lo", 0.5);
    sc.label_weight_hi = cfg.get_double("label_weight_hi", 1.5);
    sc.mech_weight_lo = cfg.get_double("mech_weight_lo", 0.5);
    sc.mech_weight_hi = cfg.get_double("mech_weight_hi", 1.5);
    sc.label_density = cfg.get_double("label_density", 0.6);
    sc.policy = rca::injection_policy_from_string(cfg.get_string("policy", "ancestor-coordinate"));
    sc.magnitude = cfg.get_double("magnitude", 4.0);
    sc.n_train = cfg.get_uint("n_train", 20000);
    sc.n_patients = cfg.get_uint("n_patients", 200);
    sc.seed = cfg.get_uint("seed", 0);

    rca::PipelineConfig pc;
    const std::string default_mode = sc.family == rca::MechanismFamily::additive_tanh
                                         ? "bottomup-additive"
                                         : "topdown-linear";
    pc.extraction.mode = rca::extraction_mode_from_string(cfg.get_string("mode", default_mode));
    pc.extraction.smoother = rca::smoother_from_string(cfg.get_string("smoother", "knn-mean"));
    pc.extraction.k = cfg.get_uint("k", 0);
    pc.extraction.bandwidth = cfg.get_double("bandwidth", 1.0);
    pc.extraction.ridge = cfg.get_double("ridge", 0.0);
    pc.l2 = cfg.get_double("l2", 1e-6);
    pc.transform = rca::Transform{
        rca::transform_from_string(cfg.get_string("transform", "logit")), 1e-9};
    pc.top_k = cfg.get_uint("top_k", 3);
    pc.background_cap = cfg.get_uint("background_cap", 2048);
    pc.seed = sc.seed;
    pc.threads = static_cast<int>(cfg.get_int("threads", 0));
    const std::string outdir = prepare_output(cfg);
    cfg.finish();

    const rca::Scenario scenario = rca::generate_scenario(sc, pc.threads);
    const rca::DetectionReport rep = rca::run_detection(scenario, pc);

    json j;
    j["config_hash"] = cfg.hash_hex();
    j["seed"] = sc.seed;
    j["patients"] = rep.patients;
    j["top_k"] = rep.top_k;
    j["top1_ehat"] = rep.top1_ehat;
    j["topk_ehat"] = rep.topk_ehat;
    j["mrr_ehat"] = rep.mrr_ehat;
    j["top1_oracle"] = rep.top1_oracle;
    j["topk_oracle"] = rep.topk_oracle;
    j["mrr_oracle"] = rep.mrr_oracle;
    j["rmse_ehat"] = rep.rmse_ehat;
    j["s_gap_mean"] = rep.s_gap_mean;
    rca::write_json_file(j, outdir + "/detection_report.json");

    rca::CsvTable pt;
    pt.header = {"patient", "rank_ehat", "rank_oracle"};
    pt.values = rca::Matrix(rep.patients, 3);
    for (std::size_t r = 0; r < rep.patients; ++r) {
        pt.values.at(r, 0) = static_cast<double>(r);
        pt.values.at(r, 1) = rep.per_patient_rank_ehat[r];
        pt.values.at(r, 2) = rep.per_patient_rank_oracle[r];
    }
    rca::write_csv(outdir + "/patients.csv", pt);

    write_manifest("bench", cfg, outdir, sc.seed, {"detection_report.json", "patients.csv"});
    log_line("bench", {{"top1_ehat", rca::format_double(rep.top1_ehat)},
                       {"top1_oracle", rca::format_double(rep.top1_oracle)},
                       {"rmse_ehat", rca::format_double(rep.rmse_ehat)},
                       {"out", outdir},
                       {"config_hash", cfg.hash_hex()}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"root-cause attribution pipeline"};
    app.require_subcommand(1);

    int rc = 0;
    auto bind = [&rc](CLI::App* cmd, const CommonArgs* args, int (*fn)(const CommonArgs&)) {
        cmd->callback([&rc, args, fn] { rc = fn(*args); });
    };

    CLI::App* simulate = app.add_subcommand("simulate", "sample a synthetic cohort");
    bind(simulate, add_common(simulate, false, false), cmd_simulate);
    CLI::App* extract = app.add_subcommand("extract", "recover error vectors from observations");
    bind(extract, add_common(extract, false, false), cmd_extract);
    CLI::App* fit = app.add_subcommand("fit", "fit the diagnosis model on extracted errors");
    bind(fit, add_common(fit, false, false), cmd_fit);
    CLI::App* attribute = app.add_subcommand("attribute", "score per-patient root causes");
    bind(attribute, add_common(attribute, true, true), cmd_attribute);
    CLI::App* verify = app.add_subcommand("verify", "check the counterfactual equivalences");
    bind(verify, add_common(verify, false, false), cmd_verify);
    CLI::App* bench = app.add_subcommand("bench", "run the detection benchmark");
    bind(bench, add_common(bench, true, false), cmd_bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "[rca] error: " << e.what() << '\n';
        return 2;
    } catch (const rca::ConfigError& e) {
        std::cerr << "[rca] config error: " << e.what() << '\n';
        return 2;
    } catch (const rca::Error& e) {
        std::cerr << "[rca] pipeline error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "[rca] pipeline error: " << e.what() << '\n';
        return 3;
    }
    return rc;
}
