#include "rca/diagnosis.hpp"

#include <algorithm>
#include <cmath>

#include "rca/serialize.hpp"

namespace rca {

namespace {

double offset_proba(double p, double c) {
    if (c == 0.0) return p;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    return sigmoid(std::log(p / (1.0 - p)) + c);
}

}  // namespace

DiagnosisModel DiagnosisModel::logistic(double intercept, std::vector<double> weights,
                                        Matrix background, FitInfo fit) {
    if (background.rows > 0 && background.cols != weights.size()) {
        throw ModelError("background column count does not match weight count");
    }
    DiagnosisModel m;
    m.kind_ = ModelKind::logistic;
    m.intercept_ = intercept;
    m.weights_ = std::move(weights);
    m.background_ = std::move(background);
    m.fit_ = fit;
    return m;
}

DiagnosisModel DiagnosisModel::exact_synthetic(Scm scm) {
    if (!scm.has_diagnosis()) {
        throw ModelError("exact-synthetic model requires a diagnosis node");
    }
    DiagnosisModel m;
    m.kind_ = ModelKind::exact_synthetic;
    m.scm_ = std::move(scm);
    return m;
}

std::size_t DiagnosisModel::num_coords() const {
    return kind_ == ModelKind::logistic ? weights_.size() : scm_->num_errors();
}

const Scm& DiagnosisModel::wrapped_scm() const {
    if (!scm_) throw ModelError("model does not wrap a synthetic model");
    return *scm_;
}

double DiagnosisModel::predict_proba(std::span<const double> e) const {
    if (e.size() != num_coords()) throw ModelError("patient arity does not match model");
    double p;
    if (kind_ == ModelKind::logistic) {
        double z = intercept_;
        for (std::size_t i = 0; i < weights_.size(); ++i) z += weights_[i] * e[i];
        p = sigmoid(z);
    } else {
        p = scm_->label_probability(scm_->push_forward(e));
    }
    return offset_proba(p, logit_offset_);
}

double DiagnosisModel::expect_transformed(std::span<const double> e,
                                          const std::vector<std::size_t>& W,
                                          const std::function<double(double)>& f,
                                          const CeOptions& opt) const {
    const std::size_t p = num_coords();
    if (e.size() != p) throw ModelError("patient arity does not match model");
    std::vector<char> retained(p, 0);
    for (std::size_t w : W) {
        if (w >= p) throw ModelError("retained index out of range");
        if (retained[w]) throw ModelError("retained index repeated");
        retained[w] = 1;
    }
    std::vector<std::size_t> V;
    for (std::size_t c = 0; c < p; ++c) {
        if (!retained[c]) V.push_back(c);
    }
    // The sampled paths below deliberately run even when V is empty: every
    // subset value then shares one accumulation shape, so subsets that differ
    // only in coordinates the model ignores stay bitwise equal.
    if (V.empty() && opt.mode == CeMode::exact) return f(predict_proba(e));

    if (opt.mode == CeMode::exact) {
        if (kind_ != ModelKind::exact_synthetic) {
            throw UnsupportedError("exact expectations require an exact-synthetic model");
        }
        if (!scm_->is_discrete()) {
            throw UnsupportedError("exact expectations require a discrete synthetic model");
        }
        std::vector<double> buf(e.begin(), e.end());
        double acc = 0.0;
        std::function<void(std::size_t, double)> rec = [&](std::size_t pos, double prob) {
            if (prob == 0.0) return;
            if (pos == V.size()) {
                acc += prob * f(predict_proba(buf));
                return;
            }
            const std::size_t c = V[pos];
            const auto& support = scm_->error_dists()[c].support();
            const auto& probs = scm_->error_dists()[c].probs();
            for (std::size_t i = 0; i < support.size(); ++i) {
                buf[c] = support[i];
                rec(pos + 1, prob * probs[i]);
            }
            buf[c] = e[c];
        };
        rec(0, 1.0);
        return acc;
    }

    // Sampled modes share one layout: per-coordinate draw streams, then an
    // average of f over rows assembled from those streams.
    std::size_t m = 0;
    if (opt.mode == CeMode::background_rows) {
        if (background_.rows == 0) throw ModelError("background-rows mode requires a background");
        m = background_.rows;
    } else {
        if (opt.mc_samples == 0) throw ModelError("monte-carlo mode requires mc_samples >= 1");
        m = opt.mc_samples;
    }

    Matrix draws(m, V.size());
    for (std::size_t vi = 0; vi < V.size(); ++vi) {
        const std::size_t c = V[vi];
        Rng rng(derive_seed(opt.seed, c));
        if (opt.mode == CeMode::background_rows) {
            // Stratified: every background value of this coordinate is used
            // exactly once, in a coordinate-keyed random order.
            const std::vector<std::size_t> perm = rng.permutation(m);
            for (std::size_t r = 0; r < m; ++r) draws.at(r, vi) = background_.at(perm[r], c);
        } else if (kind_ == ModelKind::exact_synthetic) {
            for (std::size_t r = 0; r < m; ++r) {
                draws.at(r, vi) = scm_->error_dists()[c].sample(rng);
            }
        } else {
            if (background_.rows == 0) {
                throw ModelError("monte-carlo marginalization of a fitted model needs background rows");
            }
            for (std::size_t r = 0; r < m; ++r) {
                draws.at(r, vi) = background_.at(rng.index(background_.rows), c);
            }
        }
    }

    std::vector<double> buf(e.begin(), e.end());
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t vi = 0; vi < V.size(); ++vi) buf[V[vi]] = draws.at(r, vi);
        acc += f(predict_proba(buf));
    }
    return acc / static_cast<double>(m);
}

double DiagnosisModel::conditional_expectation(std::span<const double> e,
                                               const std::vector<std::size_t>& W,
                                               const CeOptions& opt) const {
    return expect_transformed(e, W, [](double p) { return p; }, opt);
}

DiagnosisModel DiagnosisModel::with_logit_offset(double c) const {
    if (!std::isfinite(c)) throw ModelError("logit offset must be finite");
    DiagnosisModel m = *this;
    m.logit_offset_ += c;
    return m;
}

DiagnosisModel DiagnosisModel::with_background(Matrix background) const {
    if (background.rows > 0 && background.cols != num_coords()) {
        throw ModelError("background column count does not match model arity");
    }
    DiagnosisModel m = *this;
    m.background_ = std::move(background);
    return m;
}

nlohmann::json DiagnosisModel::to_json() const {
    nlohmann::json j;
    if (kind_ == ModelKind::logistic) {
        j["kind"] = "logistic";
        j["intercept"] = intercept_;
        j["weights"] = weights_;
        j["fit"] = {{"iterations", fit_.iterations},
                    {"grad_norm", fit_.grad_norm},
                    {"nll", fit_.nll}};
    } else {
        j["kind"] = "exact-synthetic";
        j["scm"] = scm_to_json(*scm_);
    }
    j["logit_offset"] = logit_offset_;
    nlohmann::json bg = nlohmann::json::array();
    for (std::size_t r = 0; r < background_.rows; ++r) {
        const auto row = background_.row(r);
        bg.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["background"] = std::move(bg);
    return j;
}

DiagnosisModel DiagnosisModel::from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        DiagnosisModel m;
        if (kind == "logistic") {
            auto weights = j.at("weights").get<std::vector<double>>();
            FitInfo fit;
            if (j.contains("fit")) {
                fit.iterations = j["fit"].value("iterations", std::size_t{0});
                fit.grad_norm = j["fit"].value("grad_norm", 0.0);
                fit.nll = j["fit"].value("nll", 0.0);
            }
            m = DiagnosisModel::logistic(j.at("intercept").get<double>(), std::move(weights),
                                         Matrix{}, fit);
        } else if (kind == "exact-synthetic") {
            m = DiagnosisModel::exact_synthetic(scm_from_json(j.at("scm")));
        } else {
            throw ConfigError("unknown model kind: " + kind);
        }
        if (j.contains("background")) {
            const auto& bg = j.at("background");
            if (!bg.empty()) {
                Matrix b(bg.size(), m.num_coords());
                for (std::size_t r = 0; r < bg.size(); ++r) {
                    const auto row = bg.at(r).get<std::vector<double>>();
                    if (row.size() != b.cols) {
                        throw ConfigError("background row arity mismatch in model document");
                    }
                    std::copy(row.begin(), row.end(), b.row(r).begin());
                }
                m = m.with_background(std::move(b));
            }
        }
        m.logit_offset_ = j.value("logit_offset", 0.0);
        return m;
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("malformed model document: ") + ex.what());
    }
}

std::string DiagnosisModel::fingerprint() const { return hex64(fnv1a64(to_json().dump())); }

DiagnosisModel fit_logistic(const Matrix& e_hat, const std::vector<int>& labels, double l2,
                            std::size_t max_iter, double tol, std::size_t background_cap) {
    const std::size_t n = e_hat.rows;
    const std::size_t p = e_hat.cols;
    if (n == 0 || labels.size() != n) throw ModelError("training rows and labels do not align");
    if (l2 < 0.0) throw ModelError("l2 penalty must be non-negative");
    std::size_t positives = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw ModelError("labels must be 0/1");
        positives += static_cast<std::size_t>(y);
    }
    if (positives == 0 || positives == n) {
        throw ModelError("degenerate labels: training data contains a single class");
    }
    for (double v : e_hat.data) {
        if (!std::isfinite(v)) throw ModelError("training matrix contains non-finite entries");
    }

    // beta = [intercept, w_0..w_{p-1}]; Newton steps with halving damping.
    const std::size_t dim = p + 1;
    std::vector<double> beta(dim, 0.0);
    std::vector<double> prob(n, 0.0);

    auto negloglik = [&](const std::vector<double>& b) {
        double nll = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double z = b[0];
            const auto row = e_hat.row(r);
            for (std::size_t k = 0; k < p; ++k) z += b[k + 1] * row[k];
            // -log like of a Bernoulli in the stable softplus form.
            nll += labels[r] ? softplus(-z) : softplus(z);
        }
        for (std::size_t k = 1; k < dim; ++k) nll += 0.5 * l2 * b[k] * b[k];
        return nll;
    };

    double current_nll = negloglik(beta);
    double grad_norm = 0.0;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // Gradient and Hessian at beta.
        std::vector<double> grad(dim, 0.0);
        std::vector<double> hess(dim * dim, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double z = beta[0];
            const auto row = e_hat.row(r);
            for (std::size_t k = 0; k < p; ++k) z += beta[k + 1] * row[k];
            const double pr = sigmoid(z);
            prob[r] = pr;
            const double resid = pr - static_cast<double>(labels[r]);
            const double s = pr * (1.0 - pr);
            grad[0] += resid;
            hess[0] += s;
            for (std::size_t k = 0; k < p; ++k) {
                grad[k + 1] += resid * row[k];
                hess[k + 1] += s * row[k];  // first row of the Hessian
            }
            for (std::size_t a = 0; a < p; ++a) {
                const double sa = s * row[a];
                for (std::size_t b = a; b < p; ++b) {
                    hess[(a + 1) * dim + (b + 1)] += sa * row[b];
                }
            }
        }
        for (std::size_t k = 1; k < dim; ++k) {
            grad[k] += l2 * beta[k];
            hess[k * dim + k] += l2;
        }
        // Mirror the upper triangle, including the intercept row.
        for (std::size_t a = 0; a < dim; ++a) {
            for (std::size_t b = a + 1; b < dim; ++b) {
                hess[b * dim + a] = hess[a * dim + b];
            }
        }
        grad_norm = 0.0;
        for (double g : grad) grad_norm = std::max(grad_norm, std::abs(g));
        if (grad_norm < tol) {
            FitInfo fit{iter, grad_norm, current_nll};
            Matrix background(std::min(n, background_cap), p);
            Rng rng(0x9D2C5680u);
            std::vector<std::size_t> perm = rng.permutation(n);
            for (std::size_t r = 0; r < background.rows; ++r) {
                const auto src = e_hat.row(perm[r]);
                std::copy(src.begin(), src.end(), background.row(r).begin());
            }
            std::vector<double> weights(beta.begin() + 1, beta.end());
            return DiagnosisModel::logistic(beta[0], std::move(weights), std::move(background),
                                            fit);
        }
        std::vector<double> rhs(dim);
        for (std::size_t k = 0; k < dim; ++k) rhs[k] = -grad[k];
        std::vector<double> step = solve_spd(hess, rhs, dim, "logistic Newton step");
        double scale = 1.0;
        bool improved = false;
        // Near the optimum the true NLL decrease falls below double
        // resolution; accepting within that slack keeps full Newton steps
        // (and quadratic convergence) alive instead of stalling.
        const double slack = 1e-12 * std::max(1.0, std::abs(current_nll));
        for (int halving = 0; halving < 50; ++halving) {
            std::vector<double> cand(dim);
            for (std::size_t k = 0; k < dim; ++k) cand[k] = beta[k] + scale * step[k];
            const double cand_nll = negloglik(cand);
            if (cand_nll <= current_nll + slack) {
                beta = std::move(cand);
                current_nll = cand_nll;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) {
            throw ModelError("logistic fit stalled; last gradient max-norm " +
                             std::to_string(grad_norm));
        }
    }
    throw ModelError("logistic fit did not converge; last gradient max-norm " +
                     std::to_string(grad_norm));
}

}  // namespace rca
