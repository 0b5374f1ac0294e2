#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rca/common.hpp"
#include "rca/scm.hpp"

namespace rca {

enum class ActionKind { point, stochastic_copy };

// An intervention on error coordinates: pin them to constants (point) or
// redraw them fresh from their own marginals (stochastic-copy).
class Action {
public:
    static Action point(std::vector<std::size_t> targets, std::vector<double> values);
    static Action stochastic_copy(std::vector<std::size_t> targets);

    ActionKind kind() const { return kind_; }
    const std::vector<std::size_t>& targets() const { return targets_; }
    const std::vector<double>& values() const { return values_; }

private:
    Action() = default;
    ActionKind kind_ = ActionKind::point;
    std::vector<std::size_t> targets_;  // sorted, unique error coordinates
    std::vector<double> values_;        // aligned with targets_ (point only)
};

// Evidence for an interventional query: either the full factual error
// vector, or observed values on a subset of variables (discrete case).
class Evidence {
public:
    // A default-constructed Evidence observes nothing.
    Evidence() = default;

    static Evidence full(std::vector<double> e);
    static Evidence observed(std::vector<std::size_t> variables, std::vector<double> values);

    bool is_full() const { return full_.has_value(); }
    const std::vector<double>& full_errors() const;
    const std::vector<std::size_t>& variables() const { return variables_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::optional<std::vector<double>> full_;
    std::vector<std::size_t> variables_;
    std::vector<double> values_;
};

struct CounterfactualQuery {
    Evidence evidence;
    std::optional<Action> action;        // nullopt = pure abduction + prediction
    std::vector<std::size_t> targets;    // queried variable indices; may include diagnosis
};

// Distribution over target tuples. Exact results enumerate the full support;
// sampled results carry a per-weight standard error.
struct OutcomeDistribution {
    std::vector<std::size_t> targets;
    std::vector<std::vector<double>> points;  // sorted lexicographically
    std::vector<double> weights;
    std::vector<double> weight_stderr;        // empty when exact
    bool exact = true;

    double total_weight() const;
    double prob_of(std::span<const double> point, double tol = 1e-9) const;
    double marginal_mean(std::size_t target_pos) const;
};

// Backtracking conditional P(E* | E). The degenerate kernel is the identity
// point mass; discrete-table kernels hold one row-stochastic table per error
// coordinate over that coordinate's support, indexed [given][star]. The three
// construction desiderata (closeness, symmetry, decomposability) are enforced
// and each violation is reported by name.
class BacktrackingKernel {
public:
    static BacktrackingKernel degenerate();
    static BacktrackingKernel from_tables(const Scm& scm, std::vector<Matrix> tables);
    // Full joint table over error states (row: given state id, column: star
    // state id, ids in enumeration order); must factorize per coordinate.
    static BacktrackingKernel from_joint(const Scm& scm, const Matrix& joint);

    bool is_degenerate() const { return degenerate_; }
    // P(E* = e_star | E = e); degenerate kernels compare within 1e-12.
    double prob(const Scm& scm, std::span<const double> e_star, std::span<const double> e) const;

private:
    BacktrackingKernel() = default;
    bool degenerate_ = true;
    std::vector<Matrix> tables_;
};

// Evidence for a backtracking query: observed counterfactual-world values v*
// (star side) and factual-world values z, each on variable subsets; or the
// full factual error vector.
struct BacktrackingEvidence {
    std::optional<std::vector<double>> full_e;
    std::vector<std::size_t> star_variables;
    std::vector<double> star_values;
    std::vector<std::size_t> fact_variables;
    std::vector<double> fact_values;

    static BacktrackingEvidence full(std::vector<double> e);
};

struct EquivalenceReport {
    double lhs4 = 0.0;  // factual conditional P(D=1 | e)
    double rhs4 = 0.0;  // degenerate-kernel backtracking prediction
    double lhs5 = 0.0;  // interventional expectation under stochastic-copy on V
    double rhs5 = 0.0;  // factual expectation marginalizing E_V
    double max_abs_diff = 0.0;
};

// Replaces the targeted error processes: point targets are clamped constants,
// stochastic-copy targets keep their marginals (fresh-draw semantics live in
// the prediction step).
Scm do_submodel(const Scm& scm, const Action& action);

OutcomeDistribution interventional_counterfactual(const Scm& scm, const CounterfactualQuery& query,
                                                  std::size_t samples = 10000,
                                                  std::uint64_t seed = 0);

OutcomeDistribution backtracking_counterfactual(const Scm& scm, const BacktrackingKernel& kernel,
                                                const BacktrackingEvidence& evidence,
                                                const std::vector<std::size_t>& targets);

EquivalenceReport verify_equivalence(const Scm& scm, std::span<const double> e,
                                     const std::vector<std::size_t>& V);

// Visits every joint error assignment of a discrete model together with its
// probability. Assignments are visited in lexicographic support order.
void for_each_error_state(const Scm& scm,
                          const std::function<void(std::span<const double>, double)>& fn);

}  // namespace rca
