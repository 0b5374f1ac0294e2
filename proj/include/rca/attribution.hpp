#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rca/common.hpp"
#include "rca/diagnosis.hpp"

namespace rca {

enum class TransformKind { identity, log_scale, logit };

std::string to_string(TransformKind kind);
TransformKind transform_from_string(const std::string& s);

// Strictly monotone score transform. log and logit clamp the probability to
// [eps, 1-eps] first so deterministic mechanisms stay finite; identity does
// not clamp, preserving exact probabilities.
struct Transform {
    TransformKind kind = TransformKind::identity;
    double eps = 1e-9;

    double operator()(double p) const;

    static Transform identity() { return {TransformKind::identity, 1e-9}; }
    static Transform log_scale(double eps = 1e-9) { return {TransformKind::log_scale, eps}; }
    static Transform logit(double eps = 1e-9) { return {TransformKind::logit, eps}; }
};

struct EffectScore {
    double value = 0.0;
    std::vector<std::size_t> V;
    TransformKind transform = TransformKind::identity;
};

struct AttributionResult {
    std::vector<double> s;
    double phi_total = 0.0;
    TransformKind transform = TransformKind::identity;
    bool sampled = false;
    std::size_t permutations = 0;     // sampled mode
    std::uint64_t seed = 0;           // sampled mode
    std::vector<double> stderrs;      // sampled mode, per coordinate
    double residual = 0.0;            // local-accuracy residual before adjustment
    bool residual_adjusted = false;
    std::string model_fingerprint;
};

// Subset value v(W) = E_{E_V}[ m(P(D | e_W, E_V)) ]; the shared building
// block of every score below.
double subset_value(const DiagnosisModel& model, std::span<const double> e,
                    const std::vector<std::size_t>& W, const Transform& m,
                    const CeOptions& opt = {});

// Phi = m[P(D|e)] - E_{E_V} m[P(D | e_W, E_V)], W the complement of V.
EffectScore effect_score(const DiagnosisModel& model, std::span<const double> e,
                         const std::vector<std::size_t>& V, const Transform& m,
                         const CeOptions& opt = {});

// gamma = v(W + i) - v(W); requires i outside W.
double marginal_gain(const DiagnosisModel& model, std::span<const double> e,
                     const std::vector<std::size_t>& W, std::size_t i, const Transform& m,
                     const CeOptions& opt = {});

// Exact Shapley vector over all 2^p subsets (p <= 12), each subset value
// computed once and cached.
AttributionResult shapley_exact(const DiagnosisModel& model, std::span<const double> e,
                                const Transform& m, const CeOptions& opt = {});

// Antithetic permutation-sampling estimator: each drawn permutation is
// paired with its reverse; per-coordinate standard errors come from the
// pair-level spread. The local-accuracy residual is redistributed
// proportionally to standard errors and flagged.
AttributionResult shapley_sampled(const DiagnosisModel& model, std::span<const double> e,
                                  const Transform& m, std::size_t permutations,
                                  std::uint64_t seed, const CeOptions& opt = {});

struct PrevalenceShiftReport {
    double offset = 0.0;
    std::vector<double> s;
    std::vector<double> s_shifted;
    double max_abs_diff = 0.0;
};

// Recomputes logit-transform Shapley under a uniform log-odds shift c and
// reports the per-coordinate difference (zero in exact arithmetic).
PrevalenceShiftReport prevalence_shift_check(const DiagnosisModel& model,
                                             std::span<const double> e, double c,
                                             const CeOptions& opt = {});

// Coordinates ordered by descending score, ties by ascending index.
std::vector<std::size_t> ranked_coords(const AttributionResult& result);

}  // namespace rca
