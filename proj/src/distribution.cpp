#include "rca/distribution.hpp"

#include <cmath>

namespace rca {

std::string to_string(DistKind kind) {
    switch (kind) {
        case DistKind::uniform: return "uniform";
        case DistKind::laplace: return "laplace";
        case DistKind::gaussian: return "gaussian";
        case DistKind::discrete: return "discrete";
    }
    throw ModelError("unreachable distribution kind");
}

DistKind dist_kind_from_string(const std::string& s) {
    if (s == "uniform") return DistKind::uniform;
    if (s == "laplace") return DistKind::laplace;
    if (s == "gaussian") return DistKind::gaussian;
    if (s == "discrete") return DistKind::discrete;
    throw ConfigError("unknown error distribution kind: " + s);
}

ErrorDistribution::ErrorDistribution(DistKind kind, double p1, double p2,
                                     std::vector<double> support, std::vector<double> probs)
    : kind_(kind), p1_(p1), p2_(p2), support_(std::move(support)), probs_(std::move(probs)) {}

ErrorDistribution ErrorDistribution::uniform(double a, double b) {
    if (!(a < b)) throw ModelError("uniform distribution requires a < b");
    return {DistKind::uniform, a, b, {}, {}};
}

ErrorDistribution ErrorDistribution::laplace(double mu, double b) {
    if (!(b > 0.0)) throw ModelError("laplace distribution requires b > 0");
    return {DistKind::laplace, mu, b, {}, {}};
}

ErrorDistribution ErrorDistribution::gaussian(double mu, double sigma) {
    if (!(sigma > 0.0)) throw ModelError("gaussian distribution requires sigma > 0");
    return {DistKind::gaussian, mu, sigma, {}, {}};
}

ErrorDistribution ErrorDistribution::discrete(std::vector<double> support,
                                              std::vector<double> probs) {
    if (support.empty()) throw ModelError("discrete distribution requires a non-empty support");
    if (support.size() != probs.size()) {
        throw ModelError("discrete distribution support/probability length mismatch");
    }
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) throw ModelError("discrete distribution has a negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ModelError("discrete distribution probabilities must sum to 1 within 1e-12");
    }
    for (std::size_t i = 1; i < support.size(); ++i) {
        if (!(support[i - 1] < support[i])) {
            throw ModelError("discrete distribution support must be strictly increasing");
        }
    }
    return {DistKind::discrete, 0.0, 0.0, std::move(support), std::move(probs)};
}

double ErrorDistribution::sample(Rng& rng) const {
    switch (kind_) {
        case DistKind::uniform:
            return p1_ + (p2_ - p1_) * rng.uniform01();
        case DistKind::laplace:
            return rng.laplace(p1_, p2_);
        case DistKind::gaussian:
            return rng.gaussian(p1_, p2_);
        case DistKind::discrete: {
            const double u = rng.uniform01();
            double cum = 0.0;
            for (std::size_t i = 0; i < support_.size(); ++i) {
                cum += probs_[i];
                if (u < cum) return support_[i];
            }
            return support_.back();
        }
    }
    throw ModelError("unreachable distribution kind");
}

double ErrorDistribution::mean() const {
    switch (kind_) {
        case DistKind::uniform: return 0.5 * (p1_ + p2_);
        case DistKind::laplace: return p1_;
        case DistKind::gaussian: return p1_;
        case DistKind::discrete: {
            double m = 0.0;
            for (std::size_t i = 0; i < support_.size(); ++i) m += probs_[i] * support_[i];
            return m;
        }
    }
    throw ModelError("unreachable distribution kind");
}

double ErrorDistribution::variance() const {
    switch (kind_) {
        case DistKind::uniform: {
            const double w = p2_ - p1_;
            return w * w / 12.0;
        }
        case DistKind::laplace: return 2.0 * p2_ * p2_;
        case DistKind::gaussian: return p2_ * p2_;
        case DistKind::discrete: {
            const double m = mean();
            double v = 0.0;
            for (std::size_t i = 0; i < support_.size(); ++i) {
                v += probs_[i] * (support_[i] - m) * (support_[i] - m);
            }
            return v;
        }
    }
    throw ModelError("unreachable distribution kind");
}

double ErrorDistribution::stddev() const { return std::sqrt(variance()); }

const std::vector<double>& ErrorDistribution::support() const {
    if (!is_discrete()) throw UnsupportedError("support() requires a discrete distribution");
    return support_;
}

const std::vector<double>& ErrorDistribution::probs() const {
    if (!is_discrete()) throw UnsupportedError("probs() requires a discrete distribution");
    return probs_;
}

double ErrorDistribution::prob_of(double value) const {
    if (!is_discrete()) throw UnsupportedError("prob_of() requires a discrete distribution");
    for (std::size_t i = 0; i < support_.size(); ++i) {
        if (support_[i] == value) return probs_[i];
    }
    return 0.0;
}

}  // namespace rca
