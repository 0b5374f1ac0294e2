#include "rca/scm.hpp"

#include <algorithm>
#include <cmath>

namespace rca {

std::string to_string(MechanismKind kind) {
    switch (kind) {
        case MechanismKind::root: return "root";
        case MechanismKind::linear: return "linear";
        case MechanismKind::additive_tabular: return "additive-tabular";
        case MechanismKind::logistic_label: return "logistic-label";
    }
    throw ModelError("unreachable mechanism kind");
}

MechanismKind mechanism_kind_from_string(const std::string& s) {
    if (s == "root") return MechanismKind::root;
    if (s == "linear") return MechanismKind::linear;
    if (s == "additive-tabular") return MechanismKind::additive_tabular;
    if (s == "logistic-label") return MechanismKind::logistic_label;
    throw ConfigError("unknown mechanism kind: " + s);
}

std::string to_string(Primitive p) {
    switch (p) {
        case Primitive::affine: return "affine";
        case Primitive::tanh_squash: return "tanh-squash";
        case Primitive::quadratic: return "quadratic";
    }
    throw ModelError("unreachable primitive");
}

Primitive primitive_from_string(const std::string& s) {
    if (s == "affine") return Primitive::affine;
    if (s == "tanh-squash") return Primitive::tanh_squash;
    if (s == "quadratic") return Primitive::quadratic;
    throw ConfigError("unknown additive primitive: " + s);
}

double AdditiveTerm::eval(std::span<const double> parent_values) const {
    if (weights.size() != parent_values.size()) {
        throw ModelError("additive term arity mismatch");
    }
    double z = bias;
    for (std::size_t k = 0; k < weights.size(); ++k) z += weights[k] * parent_values[k];
    switch (primitive) {
        case Primitive::affine: return scale * z;
        case Primitive::tanh_squash: return scale * std::tanh(z);
        case Primitive::quadratic: return scale * z * z;
    }
    throw ModelError("unreachable primitive");
}

Mechanism Mechanism::root() {
    Mechanism m;
    m.kind_ = MechanismKind::root;
    return m;
}

Mechanism Mechanism::linear(std::vector<double> weights) {
    Mechanism m;
    m.kind_ = MechanismKind::linear;
    m.weights_ = std::move(weights);
    return m;
}

Mechanism Mechanism::additive(std::vector<AdditiveTerm> terms) {
    if (terms.empty()) throw ModelError("additive-tabular mechanism requires at least one term");
    const std::size_t arity = terms.front().weights.size();
    for (const auto& t : terms) {
        if (t.weights.size() != arity) {
            throw ModelError("additive-tabular terms disagree on parent count");
        }
    }
    Mechanism m;
    m.kind_ = MechanismKind::additive_tabular;
    m.terms_ = std::move(terms);
    return m;
}

Mechanism Mechanism::logistic(double intercept, std::vector<double> weights) {
    Mechanism m;
    m.kind_ = MechanismKind::logistic_label;
    m.intercept_ = intercept;
    m.weights_ = std::move(weights);
    return m;
}

std::size_t Mechanism::arity() const {
    switch (kind_) {
        case MechanismKind::root: return 0;
        case MechanismKind::linear: return weights_.size();
        case MechanismKind::additive_tabular: return terms_.front().weights.size();
        case MechanismKind::logistic_label: return weights_.size();
    }
    throw ModelError("unreachable mechanism kind");
}

double Mechanism::structural_value(std::span<const double> parent_values) const {
    switch (kind_) {
        case MechanismKind::root:
            if (!parent_values.empty()) throw ModelError("root mechanism given parents");
            return 0.0;
        case MechanismKind::linear: {
            if (parent_values.size() != weights_.size()) {
                throw ModelError("linear mechanism arity mismatch");
            }
            double v = 0.0;
            for (std::size_t k = 0; k < weights_.size(); ++k) {
                v += weights_[k] * parent_values[k];
            }
            return v;
        }
        case MechanismKind::additive_tabular: {
            double v = 0.0;
            for (const auto& t : terms_) v += t.eval(parent_values);
            return v;
        }
        case MechanismKind::logistic_label:
            throw UnsupportedError("logistic-label has no structural value; use label_probability");
    }
    throw ModelError("unreachable mechanism kind");
}

double Mechanism::label_probability(std::span<const double> parent_values) const {
    if (kind_ != MechanismKind::logistic_label) {
        throw UnsupportedError("label_probability requires a logistic-label mechanism");
    }
    if (parent_values.size() != weights_.size()) {
        throw ModelError("logistic-label arity mismatch");
    }
    double z = intercept_;
    for (std::size_t k = 0; k < weights_.size(); ++k) z += weights_[k] * parent_values[k];
    return sigmoid(z);
}

Scm::Scm(CausalGraph graph, std::vector<Mechanism> mechanisms,
         std::vector<ErrorDistribution> error_dists)
    : graph_(std::move(graph)),
      mechanisms_(std::move(mechanisms)),
      error_dists_(std::move(error_dists)) {
    const std::size_t n = graph_.size();
    if (mechanisms_.size() != n) {
        throw ModelError("mechanism count does not match variable count");
    }
    const std::size_t expected_errors = graph_.has_diagnosis() ? n - 1 : n;
    if (error_dists_.size() != expected_errors) {
        throw ModelError("error distribution count does not match non-diagnosis variable count");
    }
    coord_of_var_.assign(n, npos);
    for (std::size_t v = 0; v < n; ++v) {
        if (graph_.has_diagnosis() && v == graph_.diagnosis()) continue;
        coord_of_var_[v] = var_of_coord_.size();
        var_of_coord_.push_back(v);
    }
    for (std::size_t v = 0; v < n; ++v) {
        const Mechanism& m = mechanisms_[v];
        const bool is_diag = graph_.has_diagnosis() && v == graph_.diagnosis();
        if (m.kind() == MechanismKind::logistic_label && !is_diag) {
            throw ModelError("logistic-label mechanism outside the diagnosis node: " +
                             graph_.name(v));
        }
        if (is_diag && m.kind() != MechanismKind::logistic_label) {
            throw ModelError("diagnosis node requires a logistic-label mechanism");
        }
        if (m.arity() != graph_.parents(v).size()) {
            throw ModelError("mechanism arity does not match parent count at " + graph_.name(v));
        }
        if (m.kind() == MechanismKind::root && !graph_.parents(v).empty()) {
            throw ModelError("root mechanism on a node with parents: " + graph_.name(v));
        }
    }
    for (std::size_t v : graph_.topo_order()) {
        if (coord_of_var_[v] != npos) order_.push_back(v);
    }
    clamped_.assign(var_of_coord_.size(), std::nullopt);
}

Scm Scm::with_clamped_errors(const std::vector<std::pair<std::size_t, double>>& clamps) const {
    Scm out = *this;
    for (const auto& [coord, value] : clamps) {
        if (coord >= out.num_errors()) throw ModelError("clamp coordinate out of range");
        if (!std::isfinite(value)) throw ModelError("clamp value must be finite");
        out.clamped_[coord] = value;
        out.error_dists_[coord] = ErrorDistribution::discrete({value}, {1.0});
    }
    return out;
}

std::size_t Scm::coord_of_var(std::size_t var) const {
    if (var >= coord_of_var_.size() || coord_of_var_[var] == npos) {
        throw ModelError("variable has no error coordinate");
    }
    return coord_of_var_[var];
}

std::size_t Scm::var_of_coord(std::size_t coord) const {
    if (coord >= var_of_coord_.size()) throw ModelError("error coordinate out of range");
    return var_of_coord_[coord];
}

std::string Scm::coord_name(std::size_t coord) const {
    return graph_.name(var_of_coord(coord));
}

std::vector<std::string> Scm::coord_names() const {
    std::vector<std::string> names;
    names.reserve(num_errors());
    for (std::size_t c = 0; c < num_errors(); ++c) names.push_back(coord_name(c));
    return names;
}

bool Scm::is_discrete() const {
    return std::all_of(error_dists_.begin(), error_dists_.end(),
                       [](const ErrorDistribution& d) { return d.is_discrete(); });
}

bool Scm::is_invertible() const {
    for (std::size_t v = 0; v < num_vars(); ++v) {
        if (graph_.has_diagnosis() && v == graph_.diagnosis()) continue;
        if (mechanisms_[v].kind() == MechanismKind::logistic_label) return false;
    }
    return true;
}

std::vector<double> Scm::push_forward(std::span<const double> e) const {
    return push_forward(e, {});
}

std::vector<double> Scm::push_forward(std::span<const double> e,
                                      const std::vector<ValueOverride>& overrides) const {
    if (e.size() != num_errors()) throw ModelError("error vector arity mismatch");
    std::vector<double> x(num_errors(), 0.0);
    std::vector<char> forced(num_vars(), 0);
    for (const auto& ov : overrides) {
        const std::size_t c = coord_of_var(ov.variable);
        x[c] = ov.value;
        forced[ov.variable] = 1;
    }
    std::vector<double> pa_buf;
    for (std::size_t v : order_) {
        const std::size_t c = coord_of_var_[v];
        if (forced[v]) continue;
        const auto& pa = graph_.parents(v);
        pa_buf.resize(pa.size());
        for (std::size_t k = 0; k < pa.size(); ++k) pa_buf[k] = x[coord_of_var_[pa[k]]];
        const double err = clamped_[c] ? *clamped_[c] : e[c];
        x[c] = mechanisms_[v].structural_value(pa_buf) + err;
    }
    return x;
}

std::vector<double> Scm::invert(std::span<const double> x) const {
    if (!is_invertible()) {
        throw UnsupportedError("model contains a non-invertible mechanism kind");
    }
    if (x.size() != num_errors()) throw ModelError("x vector arity mismatch");
    std::vector<double> e(num_errors(), 0.0);
    std::vector<double> pa_buf;
    for (std::size_t v : order_) {
        const std::size_t c = coord_of_var_[v];
        const auto& pa = graph_.parents(v);
        pa_buf.resize(pa.size());
        for (std::size_t k = 0; k < pa.size(); ++k) pa_buf[k] = x[coord_of_var_[pa[k]]];
        e[c] = x[c] - mechanisms_[v].structural_value(pa_buf);
    }
    return e;
}

double Scm::label_probability(std::span<const double> x) const {
    if (!has_diagnosis()) throw UnsupportedError("model has no diagnosis node");
    if (x.size() != num_errors()) throw ModelError("x vector arity mismatch");
    const std::size_t d = graph_.diagnosis();
    const auto& pa = graph_.parents(d);
    std::vector<double> pa_buf(pa.size());
    for (std::size_t k = 0; k < pa.size(); ++k) pa_buf[k] = x[coord_of_var_[pa[k]]];
    return mechanisms_[d].label_probability(pa_buf);
}

Dataset Scm::sample(std::size_t n, std::uint64_t seed, int threads) const {
    if (n == 0) throw ModelError("sample requires n >= 1");
    const std::size_t p = num_errors();
    Dataset ds;
    ds.x = Matrix(n, p);
    ds.e = Matrix(n, p);
    if (has_diagnosis()) ds.labels.assign(n, 0);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t row = begin; row < end; ++row) {
            Rng rng(derive_seed(seed, row));
            auto erow = ds.e.row(row);
            for (std::size_t c = 0; c < p; ++c) erow[c] = error_dists_[c].sample(rng);
            const std::vector<double> xrow = push_forward(erow);
            auto xout = ds.x.row(row);
            std::copy(xrow.begin(), xrow.end(), xout.begin());
            if (has_diagnosis()) {
                const double prob = label_probability(xrow);
                ds.labels[row] = rng.uniform01() < prob ? 1 : 0;
            }
        }
    });
    return ds;
}

double Scm::error_prob(std::span<const double> e) const {
    if (!is_discrete()) throw UnsupportedError("error_prob requires a discrete model");
    if (e.size() != num_errors()) throw ModelError("error vector arity mismatch");
    double prob = 1.0;
    for (std::size_t c = 0; c < num_errors(); ++c) prob *= error_dists_[c].prob_of(e[c]);
    return prob;
}

}  // namespace rca
