#include "rca/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rca {

namespace {

constexpr double kMatchTol = 1e-9;

void check_sorted_unique(const std::vector<std::size_t>& idx, const char* what) {
    for (std::size_t i = 1; i < idx.size(); ++i) {
        if (idx[i - 1] >= idx[i]) throw ModelError(std::string(what) + " must be strictly increasing");
    }
}

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> idx, const char* what) {
    std::sort(idx.begin(), idx.end());
    if (std::adjacent_find(idx.begin(), idx.end()) != idx.end()) {
        throw ModelError(std::string(what) + " contains duplicates");
    }
    return idx;
}

}  // namespace

Action Action::point(std::vector<std::size_t> targets, std::vector<double> values) {
    if (targets.empty()) throw ModelError("action requires a non-empty target set");
    if (targets.size() != values.size()) throw ModelError("action target/value length mismatch");
    // Keep values aligned with the sorted targets.
    std::vector<std::size_t> perm(targets.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(),
              [&targets](std::size_t a, std::size_t b) { return targets[a] < targets[b]; });
    Action a;
    a.kind_ = ActionKind::point;
    for (std::size_t i : perm) {
        a.targets_.push_back(targets[i]);
        if (!std::isfinite(values[i])) throw ModelError("point action value must be finite");
        a.values_.push_back(values[i]);
    }
    check_sorted_unique(a.targets_, "action targets");
    return a;
}

Action Action::stochastic_copy(std::vector<std::size_t> targets) {
    if (targets.empty()) throw ModelError("action requires a non-empty target set");
    Action a;
    a.kind_ = ActionKind::stochastic_copy;
    a.targets_ = sorted_unique(std::move(targets), "action targets");
    return a;
}

Evidence Evidence::full(std::vector<double> e) {
    for (double v : e) {
        if (!std::isfinite(v)) throw ModelError("evidence values must be finite");
    }
    Evidence ev;
    ev.full_ = std::move(e);
    return ev;
}

Evidence Evidence::observed(std::vector<std::size_t> variables, std::vector<double> values) {
    if (variables.size() != values.size()) throw ModelError("evidence index/value length mismatch");
    if (variables.empty()) throw ModelError("observed evidence requires at least one variable");
    std::vector<std::size_t> perm(variables.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::sort(perm.begin(), perm.end(), [&variables](std::size_t a, std::size_t b) {
        return variables[a] < variables[b];
    });
    Evidence ev;
    for (std::size_t i : perm) {
        ev.variables_.push_back(variables[i]);
        if (!std::isfinite(values[i])) throw ModelError("evidence values must be finite");
        ev.values_.push_back(values[i]);
    }
    check_sorted_unique(ev.variables_, "evidence variables");
    return ev;
}

const std::vector<double>& Evidence::full_errors() const {
    if (!full_) throw ModelError("evidence does not carry a full error vector");
    return *full_;
}

double OutcomeDistribution::total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double OutcomeDistribution::prob_of(std::span<const double> point, double tol) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != point.size()) continue;
        bool match = true;
        for (std::size_t k = 0; k < point.size(); ++k) {
            if (std::abs(points[i][k] - point[k]) > tol) {
                match = false;
                break;
            }
        }
        if (match) s += weights[i];
    }
    return s;
}

double OutcomeDistribution::marginal_mean(std::size_t target_pos) const {
    if (target_pos >= targets.size()) throw ModelError("marginal_mean position out of range");
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * points[i][target_pos];
    return s;
}

void for_each_error_state(const Scm& scm,
                          const std::function<void(std::span<const double>, double)>& fn) {
    if (!scm.is_discrete()) throw UnsupportedError("error-state enumeration requires a discrete model");
    const std::size_t p = scm.num_errors();
    std::vector<double> e(p, 0.0);
    std::function<void(std::size_t, double)> rec = [&](std::size_t c, double prob) {
        if (prob == 0.0) return;
        if (c == p) {
            fn(e, prob);
            return;
        }
        const auto& support = scm.error_dists()[c].support();
        const auto& probs = scm.error_dists()[c].probs();
        for (std::size_t i = 0; i < support.size(); ++i) {
            e[c] = support[i];
            rec(c + 1, prob * probs[i]);
        }
    };
    rec(0, 1.0);
}

Scm do_submodel(const Scm& scm, const Action& action) {
    for (std::size_t t : action.targets()) {
        if (t >= scm.num_errors()) throw ModelError("action target coordinate out of range");
    }
    if (action.kind() == ActionKind::point) {
        std::vector<std::pair<std::size_t, double>> clamps;
        for (std::size_t i = 0; i < action.targets().size(); ++i) {
            clamps.emplace_back(action.targets()[i], action.values()[i]);
        }
        return scm.with_clamped_errors(clamps);
    }
    // Stochastic-copy redraws from the coordinate's own marginal, which is
    // exactly the original error process; the submodel is distributionally
    // identical and the fresh-draw semantics live in prediction.
    return scm;
}

namespace {

// Posterior over error vectors after abduction, as (state, weight) pairs.
using Posterior = std::vector<std::pair<std::vector<double>, double>>;

Posterior abduce(const Scm& scm, const Evidence& evidence) {
    if (evidence.is_full()) {
        const auto& e = evidence.full_errors();
        if (e.size() != scm.num_errors()) throw ModelError("evidence arity mismatch");
        if (scm.is_discrete() && scm.error_prob(e) == 0.0) {
            throw EvidenceError("evidence has probability zero under the error distribution");
        }
        return {{e, 1.0}};
    }
    if (!scm.is_discrete()) {
        throw UnsupportedError(
            "partial evidence requires a discrete model; continuous abduction is not point-mass");
    }
    for (std::size_t v : evidence.variables()) {
        if (v >= scm.num_vars()) throw ModelError("evidence variable out of range");
        if (scm.has_diagnosis() && v == scm.graph().diagnosis()) {
            throw UnsupportedError("evidence on the diagnosis node is not supported");
        }
    }
    Posterior posterior;
    double total = 0.0;
    for_each_error_state(scm, [&](std::span<const double> e, double prob) {
        const std::vector<double> x = scm.push_forward(e);
        for (std::size_t k = 0; k < evidence.variables().size(); ++k) {
            const std::size_t c = scm.coord_of_var(evidence.variables()[k]);
            if (std::abs(x[c] - evidence.values()[k]) > kMatchTol) return;
        }
        posterior.emplace_back(std::vector<double>(e.begin(), e.end()), prob);
        total += prob;
    });
    if (total <= 0.0) {
        throw EvidenceError("evidence has probability zero under the error distribution");
    }
    for (auto& [state, w] : posterior) w /= total;
    return posterior;
}

struct OutcomeAccumulator {
    const Scm& scm;
    std::vector<std::size_t> targets;
    bool wants_diagnosis = false;
    std::size_t diagnosis_pos = 0;
    std::map<std::vector<double>, double> mass;

    OutcomeAccumulator(const Scm& s, std::vector<std::size_t> t) : scm(s), targets(std::move(t)) {
        if (targets.empty()) throw ModelError("query requires a non-empty target set");
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (targets[i] >= scm.num_vars()) throw ModelError("target variable out of range");
            if (scm.has_diagnosis() && targets[i] == scm.graph().diagnosis()) {
                wants_diagnosis = true;
                diagnosis_pos = i;
            }
        }
    }

    // Adds the outcome tuple(s) reached by pushing e through the model.
    void add(std::span<const double> e, double weight) {
        if (weight == 0.0) return;
        const std::vector<double> x = scm.push_forward(e);
        std::vector<double> tuple(targets.size(), 0.0);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (wants_diagnosis && i == diagnosis_pos) continue;
            tuple[i] = x[scm.coord_of_var(targets[i])];
        }
        if (wants_diagnosis) {
            const double q = scm.label_probability(x);
            tuple[diagnosis_pos] = 1.0;
            mass[tuple] += weight * q;
            tuple[diagnosis_pos] = 0.0;
            mass[tuple] += weight * (1.0 - q);
        } else {
            mass[tuple] += weight;
        }
    }

    OutcomeDistribution finish(bool exact, std::size_t sample_count) const {
        OutcomeDistribution out;
        out.targets = targets;
        out.exact = exact;
        out.points.reserve(mass.size());
        out.weights.reserve(mass.size());
        for (const auto& [tuple, w] : mass) {
            out.points.push_back(tuple);
            out.weights.push_back(w);
        }
        if (!exact) {
            out.weight_stderr.resize(out.weights.size());
            const double n = static_cast<double>(sample_count);
            for (std::size_t i = 0; i < out.weights.size(); ++i) {
                const double w = out.weights[i];
                out.weight_stderr[i] = std::sqrt(std::max(0.0, w * (1.0 - w)) / n);
            }
        }
        return out;
    }
};

// Enumerates assignments of the refresh coordinates from their marginals and
// feeds each completed error vector to sink.
void expand_refresh(const Scm& scm, const std::vector<std::size_t>& refresh,
                    std::vector<double>& e, double weight, std::size_t pos,
                    const std::function<void(std::span<const double>, double)>& sink) {
    if (pos == refresh.size()) {
        sink(e, weight);
        return;
    }
    const std::size_t c = refresh[pos];
    const auto& support = scm.error_dists()[c].support();
    const auto& probs = scm.error_dists()[c].probs();
    const double saved = e[c];
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (probs[i] == 0.0) continue;
        e[c] = support[i];
        expand_refresh(scm, refresh, e, weight * probs[i], pos + 1, sink);
    }
    e[c] = saved;
}

}  // namespace

OutcomeDistribution interventional_counterfactual(const Scm& scm, const CounterfactualQuery& query,
                                                  std::size_t samples, std::uint64_t seed) {
    // Abduction against the original model.
    Posterior posterior = abduce(scm, query.evidence);

    // Action: clamp point targets; collect stochastic-copy targets for fresh draws.
    Scm predicted = scm;
    std::vector<std::size_t> refresh;
    if (query.action) {
        predicted = do_submodel(scm, *query.action);
        if (query.action->kind() == ActionKind::stochastic_copy) {
            refresh = query.action->targets();
        }
    }

    OutcomeAccumulator acc(predicted, query.targets);

    const bool refresh_discrete = std::all_of(
        refresh.begin(), refresh.end(),
        [&predicted](std::size_t c) { return predicted.error_dists()[c].is_discrete(); });

    if (refresh_discrete) {
        // Exact prediction by enumerating the refreshed coordinates.
        for (const auto& [state, w] : posterior) {
            std::vector<double> e = state;
            expand_refresh(predicted, refresh, e, w, 0,
                           [&acc](std::span<const double> ee, double ww) { acc.add(ee, ww); });
        }
        return acc.finish(true, 0);
    }

    // Monte Carlo prediction: redraw refreshed coordinates per sample.
    if (samples == 0) throw ModelError("sampled prediction requires samples >= 1");
    std::vector<double> cum(posterior.size(), 0.0);
    double running = 0.0;
    for (std::size_t i = 0; i < posterior.size(); ++i) {
        running += posterior[i].second;
        cum[i] = running;
    }
    const double per = 1.0 / static_cast<double>(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, s));
        std::size_t pick = 0;
        if (posterior.size() > 1) {
            const double u = rng.uniform01() * running;
            pick = static_cast<std::size_t>(
                std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
            pick = std::min(pick, posterior.size() - 1);
        }
        std::vector<double> e = posterior[pick].first;
        for (std::size_t c : refresh) e[c] = predicted.error_dists()[c].sample(rng);
        acc.add(e, per);
    }
    return acc.finish(false, samples);
}

BacktrackingKernel BacktrackingKernel::degenerate() { return {}; }

BacktrackingKernel BacktrackingKernel::from_tables(const Scm& scm, std::vector<Matrix> tables) {
    if (!scm.is_discrete()) {
        throw UnsupportedError("discrete-table kernels require a discrete model");
    }
    if (tables.size() != scm.num_errors()) {
        throw KernelError("decomposability", "kernel needs one table per error coordinate");
    }
    for (std::size_t c = 0; c < tables.size(); ++c) {
        const auto& support = scm.error_dists()[c].support();
        const Matrix& t = tables[c];
        const std::string where = " in kernel table for coordinate " + std::to_string(c);
        if (t.rows != support.size() || t.cols != support.size()) {
            throw KernelError("decomposability", "table shape does not match support" + where);
        }
        for (std::size_t g = 0; g < t.rows; ++g) {
            double row_sum = 0.0;
            for (std::size_t s = 0; s < t.cols; ++s) {
                if (!(t.at(g, s) >= 0.0)) {
                    throw KernelError("stochasticity", "negative entry" + where);
                }
                row_sum += t.at(g, s);
            }
            if (std::abs(row_sum - 1.0) > 1e-12) {
                throw KernelError("stochasticity", "row does not sum to 1" + where);
            }
        }
        for (std::size_t g = 0; g < t.rows; ++g) {
            for (std::size_t s = 0; s < t.cols; ++s) {
                if (s == g) continue;
                if (t.at(g, s) >= t.at(g, g)) {
                    throw KernelError("closeness",
                                      "given value does not uniquely maximize its row" + where);
                }
            }
        }
        for (std::size_t g = 0; g < t.rows; ++g) {
            for (std::size_t s = g + 1; s < t.cols; ++s) {
                if (std::abs(t.at(g, s) - t.at(s, g)) > 1e-12) {
                    throw KernelError("symmetry", "P(e*|e) != P(e|e*)" + where);
                }
            }
        }
    }
    BacktrackingKernel k;
    k.degenerate_ = false;
    k.tables_ = std::move(tables);
    return k;
}

BacktrackingKernel BacktrackingKernel::from_joint(const Scm& scm, const Matrix& joint) {
    if (!scm.is_discrete()) {
        throw UnsupportedError("discrete-table kernels require a discrete model");
    }
    // State count and per-coordinate radix (lexicographic enumeration order).
    const std::size_t p = scm.num_errors();
    std::vector<std::size_t> sizes(p);
    std::size_t total = 1;
    for (std::size_t c = 0; c < p; ++c) {
        sizes[c] = scm.error_dists()[c].support().size();
        total *= sizes[c];
    }
    if (joint.rows != total || joint.cols != total) {
        throw KernelError("decomposability", "joint table shape does not match the state space");
    }
    auto digits = [&](std::size_t id) {
        std::vector<std::size_t> d(p);
        for (std::size_t c = p; c > 0; --c) {
            d[c - 1] = id % sizes[c - 1];
            id /= sizes[c - 1];
        }
        return d;
    };
    // Candidate per-coordinate tables read off single-coordinate transitions
    // from a fixed base row, then verified against the full joint.
    std::vector<Matrix> tables;
    for (std::size_t c = 0; c < p; ++c) tables.emplace_back(sizes[c], sizes[c], 0.0);
    for (std::size_t g = 0; g < total; ++g) {
        double row_sum = 0.0;
        for (std::size_t s = 0; s < total; ++s) row_sum += joint.at(g, s);
        if (std::abs(row_sum - 1.0) > 1e-12) {
            throw KernelError("stochasticity", "joint row does not sum to 1");
        }
    }
    // K_c(star|given) = sum over star states with coordinate c = star and all
    // other coordinates equal to the given row's digits, normalized by the
    // probability of keeping the others fixed. For a product kernel this is
    // independent of the base row; equality across rows is checked below.
    for (std::size_t c = 0; c < p; ++c) {
        const auto base = digits(0);
        for (std::size_t g = 0; g < sizes[c]; ++g) {
            // Build the given state: base digits with coordinate c set to g.
            std::size_t gid = 0;
            for (std::size_t k = 0; k < p; ++k) {
                gid = gid * sizes[k] + (k == c ? g : base[k]);
            }
            double denom = 0.0;
            for (std::size_t s = 0; s < sizes[c]; ++s) {
                std::size_t sid = 0;
                for (std::size_t k = 0; k < p; ++k) {
                    sid = sid * sizes[k] + (k == c ? s : base[k]);
                }
                const double m = joint.at(gid, sid);
                tables[c].at(g, s) = m;
                denom += m;
            }
            if (denom <= 0.0) {
                throw KernelError("decomposability", "joint assigns zero mass to a base slice");
            }
            for (std::size_t s = 0; s < sizes[c]; ++s) tables[c].at(g, s) /= denom;
        }
    }
    // Verify the product reproduces the joint everywhere.
    for (std::size_t g = 0; g < total; ++g) {
        const auto gd = digits(g);
        for (std::size_t s = 0; s < total; ++s) {
            const auto sd = digits(s);
            double prod = 1.0;
            for (std::size_t c = 0; c < p; ++c) prod *= tables[c].at(gd[c], sd[c]);
            if (std::abs(prod - joint.at(g, s)) > 1e-12) {
                throw KernelError("decomposability",
                                  "joint kernel does not factorize per coordinate");
            }
        }
    }
    return from_tables(scm, std::move(tables));
}

double BacktrackingKernel::prob(const Scm& scm, std::span<const double> e_star,
                                std::span<const double> e) const {
    if (e_star.size() != e.size()) throw ModelError("kernel arity mismatch");
    if (degenerate_) {
        for (std::size_t c = 0; c < e.size(); ++c) {
            if (std::abs(e_star[c] - e[c]) > 1e-12) return 0.0;
        }
        return 1.0;
    }
    if (e.size() != tables_.size()) throw ModelError("kernel arity mismatch");
    double prod = 1.0;
    for (std::size_t c = 0; c < tables_.size(); ++c) {
        const auto& support = scm.error_dists()[c].support();
        std::size_t gi = support.size(), si = support.size();
        for (std::size_t i = 0; i < support.size(); ++i) {
            if (std::abs(support[i] - e[c]) <= 1e-12) gi = i;
            if (std::abs(support[i] - e_star[c]) <= 1e-12) si = i;
        }
        if (gi == support.size() || si == support.size()) {
            throw ModelError("kernel evaluated off the discrete support");
        }
        prod *= tables_[c].at(gi, si);
    }
    return prod;
}

BacktrackingEvidence BacktrackingEvidence::full(std::vector<double> e) {
    BacktrackingEvidence ev;
    ev.full_e = std::move(e);
    return ev;
}

OutcomeDistribution backtracking_counterfactual(const Scm& scm, const BacktrackingKernel& kernel,
                                                const BacktrackingEvidence& evidence,
                                                const std::vector<std::size_t>& targets) {
    // Continuous models: only the degenerate kernel with full factual
    // evidence is supported, and abduction pins E* = E = e exactly.
    if (!scm.is_discrete()) {
        if (!(kernel.is_degenerate() && evidence.full_e)) {
            throw UnsupportedError(
                "non-degenerate or partially observed backtracking requires a discrete model");
        }
        const auto& e = *evidence.full_e;
        if (e.size() != scm.num_errors()) throw ModelError("evidence arity mismatch");
        OutcomeAccumulator acc(scm, targets);
        acc.add(e, 1.0);
        return acc.finish(true, 0);
    }
    // Discrete models always run the joint-abduction sum, so the degenerate
    // kernel's collapse onto the factual conditional is computed, not assumed.

    // Joint abduction over (E*, E): weight = P(e) K(e*|e), filtered by the
    // factual z values on X(e), the star v* values on X(e*), and the optional
    // full factual error vector.
    auto matches = [&scm](std::span<const double> x, const std::vector<std::size_t>& vars,
                          const std::vector<double>& vals) {
        for (std::size_t k = 0; k < vars.size(); ++k) {
            const std::size_t c = scm.coord_of_var(vars[k]);
            if (std::abs(x[c] - vals[k]) > kMatchTol) return false;
        }
        return true;
    };
    for (std::size_t v : evidence.star_variables) {
        if (v >= scm.num_vars()) throw ModelError("evidence variable out of range");
    }
    for (std::size_t v : evidence.fact_variables) {
        if (v >= scm.num_vars()) throw ModelError("evidence variable out of range");
    }

    // Posterior over e* after marginalizing e.
    std::map<std::vector<double>, double> star_mass;
    double total = 0.0;
    for_each_error_state(scm, [&](std::span<const double> e, double pe) {
        if (evidence.full_e) {
            const auto& fe = *evidence.full_e;
            if (fe.size() != e.size()) throw ModelError("evidence arity mismatch");
            for (std::size_t c = 0; c < e.size(); ++c) {
                if (std::abs(fe[c] - e[c]) > 1e-12) return;
            }
        }
        const std::vector<double> x = scm.push_forward(e);
        if (!matches(x, evidence.fact_variables, evidence.fact_values)) return;
        const std::vector<double> e_given(e.begin(), e.end());
        for_each_error_state(scm, [&](std::span<const double> e_star, double) {
            const double k = kernel.prob(scm, e_star, e_given);
            if (k == 0.0) return;
            const std::vector<double> x_star = scm.push_forward(e_star);
            if (!matches(x_star, evidence.star_variables, evidence.star_values)) return;
            const double w = pe * k;
            star_mass[std::vector<double>(e_star.begin(), e_star.end())] += w;
            total += w;
        });
    });
    if (total <= 0.0) {
        throw EvidenceError("joint backtracking evidence has probability zero");
    }

    OutcomeAccumulator acc(scm, targets);
    for (const auto& [e_star, w] : star_mass) acc.add(e_star, w / total);
    return acc.finish(true, 0);
}

EquivalenceReport verify_equivalence(const Scm& scm, std::span<const double> e,
                                     const std::vector<std::size_t>& V) {
    if (!scm.is_discrete()) throw UnsupportedError("equivalence checks require a discrete model");
    if (!scm.has_diagnosis()) throw UnsupportedError("equivalence checks require a diagnosis node");
    if (scm.num_errors() > 12) throw UnsupportedError("state space too large: p must be <= 12");
    if (e.size() != scm.num_errors()) throw ModelError("error vector arity mismatch");
    for (std::size_t c : V) {
        if (c >= scm.num_errors()) throw ModelError("V coordinate out of range");
    }
    const std::vector<double> evec(e.begin(), e.end());
    const std::size_t d = scm.graph().diagnosis();
    const std::vector<double> d_one{1.0};

    EquivalenceReport rep;
    // Factual conditional P(D=1 | e), directly through the mechanisms.
    rep.lhs4 = scm.label_probability(scm.push_forward(e));

    // Degenerate-kernel backtracking prediction of D*.
    rep.rhs4 = backtracking_counterfactual(scm, BacktrackingKernel::degenerate(),
                                           BacktrackingEvidence::full(evec), {d})
                   .prob_of(d_one);

    // Interventional expectation under stochastic-copy of E_V.
    if (V.empty()) {
        CounterfactualQuery q{Evidence::full(evec), std::nullopt, {d}};
        rep.lhs5 = interventional_counterfactual(scm, q).prob_of(d_one);
    } else {
        CounterfactualQuery q{Evidence::full(evec), Action::stochastic_copy(V), {d}};
        rep.lhs5 = interventional_counterfactual(scm, q).prob_of(d_one);
    }

    // Factual expectation E_{E_V} P(D=1 | e_W, E_V) by direct enumeration.
    std::vector<std::size_t> refresh(V.begin(), V.end());
    std::sort(refresh.begin(), refresh.end());
    double rhs5 = 0.0;
    std::vector<double> buf = evec;
    expand_refresh(scm, refresh, buf, 1.0, 0,
                   [&](std::span<const double> ee, double ww) {
                       rhs5 += ww * scm.label_probability(scm.push_forward(ee));
                   });
    rep.rhs5 = rhs5;

    rep.max_abs_diff = std::max(std::abs(rep.lhs4 - rep.rhs4), std::abs(rep.lhs5 - rep.rhs5));
    return rep;
}

}  // namespace rca
