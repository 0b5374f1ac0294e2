#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rca/common.hpp"
#include "rca/scm.hpp"

namespace rca {

enum class ModelKind { logistic, exact_synthetic };

enum class CeMode { exact, background_rows, monte_carlo };

// Expectation machinery selector for marginalized coordinates.
struct CeOptions {
    CeMode mode = CeMode::exact;
    std::size_t mc_samples = 10000;  // monte-carlo only
    std::uint64_t seed = 0;
};

struct FitInfo {
    std::size_t iterations = 0;
    double grad_norm = 0.0;
    double nll = 0.0;
};

// P(D=1 | E): either a fitted logistic model over error coordinates or an
// exact wrapper around a synthetic model. Immutable after construction.
class DiagnosisModel {
public:
    static DiagnosisModel logistic(double intercept, std::vector<double> weights,
                                   Matrix background, FitInfo fit = {});
    static DiagnosisModel exact_synthetic(Scm scm);

    ModelKind kind() const { return kind_; }
    std::size_t num_coords() const;
    double intercept() const { return intercept_; }
    const std::vector<double>& weights() const { return weights_; }
    const Matrix& background() const { return background_; }
    const FitInfo& fit_info() const { return fit_; }
    double logit_offset() const { return logit_offset_; }
    const Scm& wrapped_scm() const;

    double predict_proba(std::span<const double> e) const;

    // E_{E_V}[ f(P(D=1 | e_W, E_V)) ] with V the complement of W. The
    // marginalized coordinates are resampled per coordinate independently
    // (exact under a Markovian error model). Draw streams are keyed by
    // coordinate, so a coordinate's draws do not depend on which other
    // coordinates are marginalized.
    double expect_transformed(std::span<const double> e, const std::vector<std::size_t>& W,
                              const std::function<double(double)>& f,
                              const CeOptions& opt = {}) const;

    // Identity-transform special case of the above: E_{E_V} P(D | e_W, E_V).
    double conditional_expectation(std::span<const double> e, const std::vector<std::size_t>& W,
                                   const CeOptions& opt = {}) const;

    // Same model with log-odds uniformly offset by c (a label-prior shift
    // with fixed class-conditional likelihoods).
    DiagnosisModel with_logit_offset(double c) const;

    DiagnosisModel with_background(Matrix background) const;

    nlohmann::json to_json() const;
    static DiagnosisModel from_json(const nlohmann::json& j);

    // FNV-1a over the canonical JSON form; ties attribution output to the
    // exact model that produced it.
    std::string fingerprint() const;

private:
    DiagnosisModel() = default;

    ModelKind kind_ = ModelKind::logistic;
    double intercept_ = 0.0;
    std::vector<double> weights_;
    std::optional<Scm> scm_;
    Matrix background_;
    double logit_offset_ = 0.0;
    FitInfo fit_;
};

// L2-penalized logistic regression by damped Newton iterations. The penalty
// skips the intercept. Stores a fixed-seed subsample of the training rows
// (at most `background_cap`) as the model's marginalization background.
DiagnosisModel fit_logistic(const Matrix& e_hat, const std::vector<int>& labels, double l2 = 1e-6,
                            std::size_t max_iter = 100, double tol = 1e-8,
                            std::size_t background_cap = 2048);

}  // namespace rca
