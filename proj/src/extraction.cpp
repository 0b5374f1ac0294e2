#include "rca/extraction.hpp"

#include <algorithm>
#include <cmath>

namespace rca {

std::string to_string(ExtractionMode mode) {
    switch (mode) {
        case ExtractionMode::topdown_linear: return "topdown-linear";
        case ExtractionMode::bottomup_additive: return "bottomup-additive";
    }
    throw ModelError("unreachable extraction mode");
}

ExtractionMode extraction_mode_from_string(const std::string& s) {
    if (s == "topdown-linear") return ExtractionMode::topdown_linear;
    if (s == "bottomup-additive") return ExtractionMode::bottomup_additive;
    throw ConfigError("unknown extraction mode: " + s);
}

std::string to_string(SmootherKind kind) {
    switch (kind) {
        case SmootherKind::knn_mean: return "knn-mean";
        case SmootherKind::local_linear: return "local-linear";
    }
    throw ModelError("unreachable smoother kind");
}

SmootherKind smoother_from_string(const std::string& s) {
    if (s == "knn-mean") return SmootherKind::knn_mean;
    if (s == "local-linear") return SmootherKind::local_linear;
    throw ConfigError("unknown smoother: " + s);
}

std::size_t default_knn_k(std::size_t n) {
    const double rule = std::ceil(std::pow(static_cast<double>(n), 0.6) / 2.0);
    return std::max<std::size_t>(10, static_cast<std::size_t>(rule));
}

namespace {

// Column layout: non-diagnosis variables in ascending variable order.
std::vector<std::size_t> coord_vars(const CausalGraph& graph) {
    std::vector<std::size_t> vars;
    for (std::size_t v = 0; v < graph.size(); ++v) {
        if (graph.has_diagnosis() && v == graph.diagnosis()) continue;
        vars.push_back(v);
    }
    return vars;
}

void check_finite(const Matrix& x) {
    for (double v : x.data) {
        if (!std::isfinite(v)) throw ModelError("data matrix contains non-finite entries");
    }
}

}  // namespace

Extractor Extractor::fit(const Matrix& x, const CausalGraph& graph, const ExtractionConfig& cfg) {
    if (cfg.ridge < 0.0) throw ConfigError("ridge must be non-negative");
    if (cfg.bandwidth <= 0.0 && cfg.mode == ExtractionMode::bottomup_additive &&
        cfg.smoother == SmootherKind::local_linear) {
        throw ConfigError("local-linear bandwidth must be positive");
    }
    const std::vector<std::size_t> vars = coord_vars(graph);
    const std::size_t p = vars.size();
    if (x.cols != p) throw ModelError("data column count does not match non-diagnosis variables");
    const std::size_t n = x.rows;
    if (n == 0) throw ModelError("data matrix has no rows");
    check_finite(x);

    std::vector<std::size_t> coord_of_var(graph.size(), static_cast<std::size_t>(-1));
    for (std::size_t c = 0; c < p; ++c) coord_of_var[vars[c]] = c;

    Extractor ex;
    ex.cfg_ = cfg;
    ex.parent_cols_.assign(p, {});
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t pv : graph.parents(vars[c])) {
            ex.parent_cols_[c].push_back(coord_of_var[pv]);
        }
    }

    if (cfg.mode == ExtractionMode::topdown_linear) {
        ex.coef_.assign(p, {});
        for (std::size_t c = 0; c < p; ++c) {
            const auto& pa = ex.parent_cols_[c];
            if (pa.empty()) continue;
            if (n < pa.size() + 2) {
                throw ModelError("too few rows to fit " + graph.name(vars[c]) + ": need at least " +
                                 std::to_string(pa.size() + 2));
            }
            // Least squares of x_c on [1, parents]; the residual keeps the
            // fitted intercept inside e_hat so error means survive.
            const std::size_t dim = pa.size() + 1;
            std::vector<double> ata(dim * dim, 0.0);
            std::vector<double> aty(dim, 0.0);
            std::vector<double> row(dim, 1.0);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t k = 0; k < pa.size(); ++k) row[k + 1] = x.at(r, pa[k]);
                const double y = x.at(r, c);
                for (std::size_t a = 0; a < dim; ++a) {
                    aty[a] += row[a] * y;
                    for (std::size_t b = a; b < dim; ++b) ata[a * dim + b] += row[a] * row[b];
                }
            }
            for (std::size_t a = 0; a < dim; ++a) {
                for (std::size_t b = 0; b < a; ++b) ata[a * dim + b] = ata[b * dim + a];
                ata[a * dim + a] += cfg.ridge;
            }
            ex.coef_[c] = solve_spd(std::move(ata), std::move(aty), dim,
                                    "linear extraction at " + graph.name(vars[c]));
        }
    } else {
        if (n < 50) throw ModelError("bottom-up extraction requires at least 50 rows");
        ex.effective_k_ = cfg.k == 0 ? default_knn_k(n) : cfg.k;
        if (cfg.smoother == SmootherKind::knn_mean) {
            if (ex.effective_k_ < 2) throw ConfigError("smoother k must be at least 2");
            if (ex.effective_k_ > n) throw ConfigError("smoother k exceeds the row count");
        }
        ex.train_x_ = x;
    }

    ex.training_.e_hat = ex.residuals(x);
    ex.training_.residual_variance.assign(p, 0.0);
    for (std::size_t c = 0; c < p; ++c) {
        ex.training_.residual_variance[c] = variance(ex.training_.e_hat.column(c));
    }
    if (cfg.mode == ExtractionMode::topdown_linear) ex.training_.coefficients = ex.coef_;
    return ex;
}

Matrix Extractor::residuals(const Matrix& x) const {
    const std::size_t p = parent_cols_.size();
    if (x.cols != p) throw ModelError("data column count does not match the fitted layout");
    check_finite(x);
    const std::size_t n = x.rows;
    Matrix out(n, p);

    if (cfg_.mode == ExtractionMode::topdown_linear) {
        for (std::size_t c = 0; c < p; ++c) {
            const auto& pa = parent_cols_[c];
            if (pa.empty()) {
                // Root vertices are their own errors, bit for bit.
                for (std::size_t r = 0; r < n; ++r) out.at(r, c) = x.at(r, c);
                continue;
            }
            const auto& beta = coef_[c];
            for (std::size_t r = 0; r < n; ++r) {
                double fitted = 0.0;  // intercept beta[0] intentionally excluded
                for (std::size_t k = 0; k < pa.size(); ++k) {
                    fitted += beta[k + 1] * x.at(r, pa[k]);
                }
                out.at(r, c) = x.at(r, c) - fitted;
            }
        }
        return out;
    }

    // Bottom-up: reverse topological sweep (each variable depends only on its
    // own parents, so the sweep order is cosmetic but kept for clarity).
    for (std::size_t c = 0; c < p; ++c) {
        const auto& pa = parent_cols_[c];
        if (pa.empty()) {
            for (std::size_t r = 0; r < n; ++r) out.at(r, c) = x.at(r, c);
            continue;
        }
        const std::size_t train_n = train_x_.rows;
        parallel_for(n, cfg_.threads, [&](std::size_t begin, std::size_t end) {
            std::vector<std::pair<double, std::size_t>> dist(train_n);
            for (std::size_t r = begin; r < end; ++r) {
                if (cfg_.smoother == SmootherKind::knn_mean) {
                    for (std::size_t t = 0; t < train_n; ++t) {
                        double d2 = 0.0;
                        for (std::size_t k = 0; k < pa.size(); ++k) {
                            const double d = train_x_.at(t, pa[k]) - x.at(r, pa[k]);
                            d2 += d * d;
                        }
                        dist[t] = {d2, t};
                    }
                    std::nth_element(dist.begin(), dist.begin() + (effective_k_ - 1), dist.end());
                    // Deterministic neighbor set: order the k-boundary by
                    // (distance, row index).
                    std::sort(dist.begin(), dist.begin() + effective_k_);
                    double boundary = dist[effective_k_ - 1].first;
                    // Pull in any rows tied with the boundary so the ascending
                    // row-index rule decides membership.
                    std::vector<std::pair<double, std::size_t>> tied;
                    for (std::size_t t = effective_k_; t < train_n; ++t) {
                        if (dist[t].first == boundary) tied.push_back(dist[t]);
                    }
                    if (!tied.empty()) {
                        std::vector<std::pair<double, std::size_t>> pool(
                            dist.begin(), dist.begin() + effective_k_);
                        pool.insert(pool.end(), tied.begin(), tied.end());
                        std::sort(pool.begin(), pool.end());
                        pool.resize(effective_k_);
                        double acc = 0.0;
                        for (const auto& [d2, t] : pool) acc += train_x_.at(t, c);
                        out.at(r, c) = x.at(r, c) - acc / static_cast<double>(effective_k_);
                        continue;
                    }
                    double acc = 0.0;
                    for (std::size_t i = 0; i < effective_k_; ++i) {
                        acc += train_x_.at(dist[i].second, c);
                    }
                    out.at(r, c) = x.at(r, c) - acc / static_cast<double>(effective_k_);
                } else {
                    // Local-linear: Gaussian-weighted least squares around the
                    // query point, ridge-stabilized.
                    const std::size_t dim = pa.size() + 1;
                    std::vector<double> ata(dim * dim, 0.0);
                    std::vector<double> aty(dim, 0.0);
                    std::vector<double> rowv(dim, 1.0);
                    const double inv2h2 = 1.0 / (2.0 * cfg_.bandwidth * cfg_.bandwidth);
                    for (std::size_t t = 0; t < train_n; ++t) {
                        double d2 = 0.0;
                        for (std::size_t k = 0; k < pa.size(); ++k) {
                            const double d = train_x_.at(t, pa[k]) - x.at(r, pa[k]);
                            d2 += d * d;
                            rowv[k + 1] = d;  // centered at the query point
                        }
                        const double w = std::exp(-d2 * inv2h2);
                        if (w < 1e-14) continue;
                        const double y = train_x_.at(t, c);
                        for (std::size_t a = 0; a < dim; ++a) {
                            aty[a] += w * rowv[a] * y;
                            for (std::size_t b = a; b < dim; ++b) {
                                ata[a * dim + b] += w * rowv[a] * rowv[b];
                            }
                        }
                    }
                    for (std::size_t a = 0; a < dim; ++a) {
                        for (std::size_t b = 0; b < a; ++b) ata[a * dim + b] = ata[b * dim + a];
                        ata[a * dim + a] += std::max(cfg_.ridge, 1e-10);
                    }
                    const std::vector<double> beta =
                        solve_spd(std::move(ata), std::move(aty), dim, "local-linear smoother");
                    // Prediction at the query point is the centered intercept.
                    out.at(r, c) = x.at(r, c) - beta[0];
                }
            }
        });
    }
    return out;
}

ExtractedErrors extract_topdown_linear(const Matrix& x, const CausalGraph& graph,
                                       const ExtractionConfig& cfg) {
    ExtractionConfig c = cfg;
    c.mode = ExtractionMode::topdown_linear;
    return Extractor::fit(x, graph, c).training();
}

ExtractedErrors extract_bottomup_additive(const Matrix& x, const CausalGraph& graph,
                                          const ExtractionConfig& cfg) {
    ExtractionConfig c = cfg;
    c.mode = ExtractionMode::bottomup_additive;
    return Extractor::fit(x, graph, c).training();
}

Matrix invert_rows(const Scm& scm, const Matrix& x, int threads) {
    if (x.cols != scm.num_errors()) throw ModelError("data column count does not match the model");
    Matrix out(x.rows, x.cols);
    parallel_for(x.rows, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::vector<double> e = scm.invert(x.row(r));
            std::copy(e.begin(), e.end(), out.row(r).begin());
        }
    });
    return out;
}

}  // namespace rca
