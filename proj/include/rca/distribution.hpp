#pragma once

#include <string>
#include <vector>

#include "rca/common.hpp"

namespace rca {

enum class DistKind { uniform, laplace, gaussian, discrete };

std::string to_string(DistKind kind);
DistKind dist_kind_from_string(const std::string& s);

// Independent scalar error marginal. Continuous kinds sample through fixed
// closed-form transforms of the engine's uniforms so draws are reproducible
// across platforms; the discrete kind carries an explicit finite support.
class ErrorDistribution {
public:
    static ErrorDistribution uniform(double a, double b);
    static ErrorDistribution laplace(double mu, double b);
    static ErrorDistribution gaussian(double mu, double sigma);
    static ErrorDistribution discrete(std::vector<double> support, std::vector<double> probs);

    DistKind kind() const { return kind_; }
    bool is_discrete() const { return kind_ == DistKind::discrete; }

    double sample(Rng& rng) const;
    double mean() const;
    double variance() const;
    double stddev() const;

    // Discrete-only accessors; throw UnsupportedError otherwise.
    const std::vector<double>& support() const;
    const std::vector<double>& probs() const;
    double prob_of(double value) const;

    // Continuous parameter accessors (p1 = a/mu, p2 = b/sigma).
    double p1() const { return p1_; }
    double p2() const { return p2_; }

private:
    ErrorDistribution(DistKind kind, double p1, double p2,
                      std::vector<double> support, std::vector<double> probs);

    DistKind kind_;
    double p1_ = 0.0;
    double p2_ = 1.0;
    std::vector<double> support_;
    std::vector<double> probs_;
};

}  // namespace rca
