#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rca/common.hpp"
#include "rca/distribution.hpp"
#include "rca/graph.hpp"

namespace rca {

enum class MechanismKind { root, linear, additive_tabular, logistic_label };

std::string to_string(MechanismKind kind);
MechanismKind mechanism_kind_from_string(const std::string& s);

enum class Primitive { affine, tanh_squash, quadratic };

std::string to_string(Primitive p);
Primitive primitive_from_string(const std::string& s);

// One term of an additive-tabular mechanism: scale * h(bias + dot(w, pa)) with h
// the named primitive. The mechanism value is the sum over terms, so the
// error enters additively and inversion stays a subtraction.
struct AdditiveTerm {
    Primitive primitive = Primitive::affine;
    std::vector<double> weights;
    double bias = 0.0;
    double scale = 1.0;

    double eval(std::span<const double> parent_values) const;
};

class Mechanism {
public:
    static Mechanism root();
    static Mechanism linear(std::vector<double> weights);
    static Mechanism additive(std::vector<AdditiveTerm> terms);
    static Mechanism logistic(double intercept, std::vector<double> weights);

    MechanismKind kind() const { return kind_; }
    std::size_t arity() const;
    const std::vector<double>& weights() const { return weights_; }
    double intercept() const { return intercept_; }
    const std::vector<AdditiveTerm>& terms() const { return terms_; }

    // Deterministic part g(pa); zero for roots. Not defined for
    // logistic-label, which owns the label probability instead.
    double structural_value(std::span<const double> parent_values) const;

    // P(D=1 | pa) for logistic-label.
    double label_probability(std::span<const double> parent_values) const;

private:
    MechanismKind kind_ = MechanismKind::root;
    std::vector<double> weights_;
    double intercept_ = 0.0;
    std::vector<AdditiveTerm> terms_;
};

// Sampled dataset: one row per unit, one column per non-diagnosis variable.
struct Dataset {
    Matrix x;
    Matrix e;
    std::vector<int> labels;  // empty when the model has no diagnosis node

    std::size_t rows() const { return x.rows; }
};

// A single x override used by intervention submodels: the variable's
// structural assignment is replaced by the constant.
struct ValueOverride {
    std::size_t variable = 0;
    double value = 0.0;
};

// Structural equation model over the graph. Error vectors index the
// non-diagnosis variables in ascending variable order; the diagnosis node,
// when present, carries a logistic-label mechanism and its own implicit
// noise, which is never part of an error vector.
class Scm {
public:
    Scm(CausalGraph graph, std::vector<Mechanism> mechanisms,
        std::vector<ErrorDistribution> error_dists);

    const CausalGraph& graph() const { return graph_; }
    const std::vector<Mechanism>& mechanisms() const { return mechanisms_; }
    const std::vector<ErrorDistribution>& error_dists() const { return error_dists_; }

    std::size_t num_vars() const { return graph_.size(); }
    std::size_t num_errors() const { return error_dists_.size(); }
    bool has_diagnosis() const { return graph_.has_diagnosis(); }

    // Mapping between variable indices and error/x coordinates.
    std::size_t coord_of_var(std::size_t var) const;
    std::size_t var_of_coord(std::size_t coord) const;
    std::string coord_name(std::size_t coord) const;
    std::vector<std::string> coord_names() const;

    // True when every error marginal is finite discrete (enumerable joint).
    bool is_discrete() const;
    // True when every non-diagnosis mechanism is root/linear/additive.
    bool is_invertible() const;

    std::vector<double> push_forward(std::span<const double> e) const;
    std::vector<double> push_forward(std::span<const double> e,
                                     const std::vector<ValueOverride>& overrides) const;
    std::vector<double> invert(std::span<const double> x) const;

    // P(D = 1 | x) through the diagnosis node's logistic-label mechanism.
    double label_probability(std::span<const double> x) const;

    Dataset sample(std::size_t n, std::uint64_t seed, int threads = 1) const;

    // Probability of one joint error assignment (discrete models only).
    double error_prob(std::span<const double> e) const;

    // Intervention submodel support: a clamped coordinate's error is pinned
    // to a constant. push_forward ignores the supplied entry, sampling draws
    // the constant, and the coordinate's marginal becomes a point mass.
    Scm with_clamped_errors(const std::vector<std::pair<std::size_t, double>>& clamps) const;
    bool is_clamped(std::size_t coord) const { return clamped_.at(coord).has_value(); }

private:
    CausalGraph graph_;
    std::vector<Mechanism> mechanisms_;
    std::vector<ErrorDistribution> error_dists_;
    std::vector<std::size_t> coord_of_var_;   // npos for the diagnosis node
    std::vector<std::size_t> var_of_coord_;
    std::vector<std::size_t> order_;          // topological order of non-diagnosis vars
    std::vector<std::optional<double>> clamped_;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

}  // namespace rca
