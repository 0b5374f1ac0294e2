#include "rca/serialize.hpp"

#include <fstream>

namespace rca {

namespace {

using nlohmann::json;

json mechanism_to_json(const Mechanism& m) {
    json j;
    j["kind"] = to_string(m.kind());
    switch (m.kind()) {
        case MechanismKind::root:
            break;
        case MechanismKind::linear:
            j["weights"] = m.weights();
            break;
        case MechanismKind::additive_tabular: {
            json terms = json::array();
            for (const auto& t : m.terms()) {
                terms.push_back({{"primitive", to_string(t.primitive)},
                                 {"weights", t.weights},
                                 {"bias", t.bias},
                                 {"scale", t.scale}});
            }
            j["terms"] = std::move(terms);
            break;
        }
        case MechanismKind::logistic_label:
            j["intercept"] = m.intercept();
            j["weights"] = m.weights();
            break;
    }
    return j;
}

Mechanism mechanism_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw ConfigError("mechanism entry must be an object with a kind");
    }
    const MechanismKind kind = mechanism_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
        case MechanismKind::root:
            return Mechanism::root();
        case MechanismKind::linear:
            return Mechanism::linear(j.at("weights").get<std::vector<double>>());
        case MechanismKind::additive_tabular: {
            std::vector<AdditiveTerm> terms;
            for (const auto& tj : j.at("terms")) {
                AdditiveTerm t;
                t.primitive = primitive_from_string(tj.at("primitive").get<std::string>());
                t.weights = tj.at("weights").get<std::vector<double>>();
                t.bias = tj.at("bias").get<double>();
                t.scale = tj.at("scale").get<double>();
                terms.push_back(std::move(t));
            }
            return Mechanism::additive(std::move(terms));
        }
        case MechanismKind::logistic_label:
            return Mechanism::logistic(j.at("intercept").get<double>(),
                                       j.at("weights").get<std::vector<double>>());
    }
    throw ConfigError("unreachable mechanism kind");
}

json error_to_json(const ErrorDistribution& d) {
    json j;
    j["kind"] = to_string(d.kind());
    switch (d.kind()) {
        case DistKind::uniform:
            j["a"] = d.p1();
            j["b"] = d.p2();
            break;
        case DistKind::laplace:
            j["mu"] = d.p1();
            j["b"] = d.p2();
            break;
        case DistKind::gaussian:
            j["mu"] = d.p1();
            j["sigma"] = d.p2();
            break;
        case DistKind::discrete:
            j["support"] = d.support();
            j["probs"] = d.probs();
            break;
    }
    return j;
}

ErrorDistribution error_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) {
        throw ConfigError("error entry must be an object with a kind");
    }
    const DistKind kind = dist_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
        case DistKind::uniform:
            return ErrorDistribution::uniform(j.at("a").get<double>(), j.at("b").get<double>());
        case DistKind::laplace:
            return ErrorDistribution::laplace(j.at("mu").get<double>(), j.at("b").get<double>());
        case DistKind::gaussian:
            return ErrorDistribution::gaussian(j.at("mu").get<double>(),
                                               j.at("sigma").get<double>());
        case DistKind::discrete:
            return ErrorDistribution::discrete(j.at("support").get<std::vector<double>>(),
                                               j.at("probs").get<std::vector<double>>());
    }
    throw ConfigError("unreachable distribution kind");
}

}  // namespace

json scm_to_json(const Scm& scm) {
    const CausalGraph& g = scm.graph();
    json j;
    j["variables"] = g.names();
    json edges = json::array();
    for (std::size_t v = 0; v < g.size(); ++v) {
        for (std::size_t c : g.children(v)) {
            edges.push_back(json::array({g.name(v), g.name(c)}));
        }
    }
    j["edges"] = std::move(edges);
    j["diagnosis"] = g.has_diagnosis() ? json(g.name(g.diagnosis())) : json(nullptr);
    json mechs = json::array();
    for (const auto& m : scm.mechanisms()) mechs.push_back(mechanism_to_json(m));
    j["mechanisms"] = std::move(mechs);
    json errs = json::array();
    for (const auto& d : scm.error_dists()) errs.push_back(error_to_json(d));
    j["errors"] = std::move(errs);
    return j;
}

Scm scm_from_json(const json& j) {
    try {
        const auto names = j.at("variables").get<std::vector<std::string>>();
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        auto index_of = [&names](const std::string& name) -> std::size_t {
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (names[i] == name) return i;
            }
            throw ConfigError("edge references unknown variable: " + name);
        };
        for (const auto& ej : j.at("edges")) {
            if (!ej.is_array() || ej.size() != 2) {
                throw ConfigError("edge entries must be [parent, child] pairs");
            }
            edges.emplace_back(index_of(ej.at(0).get<std::string>()),
                               index_of(ej.at(1).get<std::string>()));
        }
        std::optional<std::size_t> diagnosis;
        if (j.contains("diagnosis") && !j.at("diagnosis").is_null()) {
            diagnosis = index_of(j.at("diagnosis").get<std::string>());
        }
        CausalGraph graph(names, std::move(edges), diagnosis);
        std::vector<Mechanism> mechanisms;
        for (const auto& mj : j.at("mechanisms")) mechanisms.push_back(mechanism_from_json(mj));
        std::vector<ErrorDistribution> dists;
        for (const auto& dj : j.at("errors")) dists.push_back(error_from_json(dj));
        return Scm(std::move(graph), std::move(mechanisms), std::move(dists));
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed model document: ") + ex.what());
    }
}

void save_scm(const Scm& scm, const std::string& path) {
    write_json_file(scm_to_json(scm), path);
}

Scm load_scm(const std::string& path) { return scm_from_json(read_json_file(path)); }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& ex) {
        throw ConfigError("invalid JSON in " + path + ": " + ex.what());
    }
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace rca
