#pragma once

#include <string>
#include <vector>

#include "rca/common.hpp"
#include "rca/graph.hpp"
#include "rca/scm.hpp"

namespace rca {

enum class ExtractionMode { topdown_linear, bottomup_additive };
enum class SmootherKind { knn_mean, local_linear };

std::string to_string(ExtractionMode mode);
ExtractionMode extraction_mode_from_string(const std::string& s);
std::string to_string(SmootherKind kind);
SmootherKind smoother_from_string(const std::string& s);

struct ExtractionConfig {
    ExtractionMode mode = ExtractionMode::topdown_linear;
    SmootherKind smoother = SmootherKind::knn_mean;
    std::size_t k = 0;        // 0 = default rule max(10, ceil(n^0.6 / 2))
    double bandwidth = 1.0;   // local-linear kernel width
    double ridge = 0.0;       // linear-solve stabilizer
    int threads = 1;
};

std::size_t default_knn_k(std::size_t n);

struct ExtractedErrors {
    Matrix e_hat;
    std::vector<double> residual_variance;          // per coordinate
    std::vector<std::vector<double>> coefficients;  // top-down fitted weights per coordinate
};

// Residual-based error recovery. fit() learns per-variable regressions or
// smoothers on training rows; residuals() applies them to any rows with the
// same column layout. Columns map to non-diagnosis variables in ascending
// variable order.
class Extractor {
public:
    static Extractor fit(const Matrix& x, const CausalGraph& graph, const ExtractionConfig& cfg);

    Matrix residuals(const Matrix& x) const;
    const ExtractedErrors& training() const { return training_; }
    const ExtractionConfig& config() const { return cfg_; }

private:
    Extractor() = default;

    ExtractionConfig cfg_;
    std::vector<std::vector<std::size_t>> parent_cols_;  // per coordinate
    std::vector<std::vector<double>> coef_;              // top-down: per coordinate
    Matrix train_x_;                                     // bottom-up: training rows
    std::size_t effective_k_ = 0;
    ExtractedErrors training_;
};

// One-shot forms of the two extraction procedures.
ExtractedErrors extract_topdown_linear(const Matrix& x, const CausalGraph& graph,
                                       const ExtractionConfig& cfg);
ExtractedErrors extract_bottomup_additive(const Matrix& x, const CausalGraph& graph,
                                          const ExtractionConfig& cfg);

// Oracle-mode recovery: exact inversion through known mechanisms, row-wise.
Matrix invert_rows(const Scm& scm, const Matrix& x, int threads = 1);

}  // namespace rca
