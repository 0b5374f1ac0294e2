#include "rca/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace rca {

std::string to_string(TransformKind kind) {
    switch (kind) {
        case TransformKind::identity: return "identity";
        case TransformKind::log_scale: return "log";
        case TransformKind::logit: return "logit";
    }
    throw ModelError("unreachable transform kind");
}

TransformKind transform_from_string(const std::string& s) {
    if (s == "identity") return TransformKind::identity;
    if (s == "log") return TransformKind::log_scale;
    if (s == "logit") return TransformKind::logit;
    throw ConfigError("unknown transform: " + s);
}

double Transform::operator()(double p) const {
    switch (kind) {
        case TransformKind::identity:
            return p;
        case TransformKind::log_scale: {
            const double q = std::clamp(p, eps, 1.0 - eps);
            return std::log(q);
        }
        case TransformKind::logit: {
            const double q = std::clamp(p, eps, 1.0 - eps);
            return std::log(q / (1.0 - q));
        }
    }
    throw ModelError("unreachable transform kind");
}

double subset_value(const DiagnosisModel& model, std::span<const double> e,
                    const std::vector<std::size_t>& W, const Transform& m,
                    const CeOptions& opt) {
    return model.expect_transformed(e, W, [&m](double p) { return m(p); }, opt);
}

EffectScore effect_score(const DiagnosisModel& model, std::span<const double> e,
                         const std::vector<std::size_t>& V, const Transform& m,
                         const CeOptions& opt) {
    const std::size_t p = model.num_coords();
    std::vector<char> in_v(p, 0);
    for (std::size_t c : V) {
        if (c >= p) throw ModelError("V coordinate out of range");
        in_v[c] = 1;
    }
    std::vector<std::size_t> W;
    for (std::size_t c = 0; c < p; ++c) {
        if (!in_v[c]) W.push_back(c);
    }
    EffectScore score;
    score.V.assign(V.begin(), V.end());
    std::sort(score.V.begin(), score.V.end());
    score.transform = m.kind;
    score.value = m(model.predict_proba(e)) - subset_value(model, e, W, m, opt);
    return score;
}

double marginal_gain(const DiagnosisModel& model, std::span<const double> e,
                     const std::vector<std::size_t>& W, std::size_t i, const Transform& m,
                     const CeOptions& opt) {
    for (std::size_t w : W) {
        if (w == i) throw ModelError("marginal gain coordinate already retained");
    }
    std::vector<std::size_t> Wi(W.begin(), W.end());
    Wi.push_back(i);
    return subset_value(model, e, Wi, m, opt) - subset_value(model, e, W, m, opt);
}

namespace {

// All subset values keyed by retained-set bitmask; 2^p entries.
std::vector<double> all_subset_values(const DiagnosisModel& model, std::span<const double> e,
                                      const Transform& m, const CeOptions& opt) {
    const std::size_t p = model.num_coords();
    const std::size_t total = std::size_t{1} << p;
    std::vector<double> v(total, 0.0);
    std::vector<std::size_t> W;
    for (std::size_t mask = 0; mask < total; ++mask) {
        W.clear();
        for (std::size_t c = 0; c < p; ++c) {
            if (mask & (std::size_t{1} << c)) W.push_back(c);
        }
        v[mask] = subset_value(model, e, W, m, opt);
    }
    return v;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t j = 1; j <= k; ++j) {
        r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    }
    return r;
}

}  // namespace

AttributionResult shapley_exact(const DiagnosisModel& model, std::span<const double> e,
                                const Transform& m, const CeOptions& opt) {
    const std::size_t p = model.num_coords();
    if (p == 0) throw ModelError("model has no coordinates");
    if (p > 12) {
        throw ModelError("exact Shapley limited to p <= 12; use the sampled estimator");
    }
    const std::vector<double> v = all_subset_values(model, e, m, opt);
    const std::size_t full = (std::size_t{1} << p) - 1;

    // Subset-size weights 1 / C(p-1, |W|).
    std::vector<double> inv_choose(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) inv_choose[k] = 1.0 / binomial(p - 1, k);

    AttributionResult res;
    res.s.assign(p, 0.0);
    res.transform = m.kind;
    res.model_fingerprint = model.fingerprint();
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        double acc = 0.0;
        // Enumerate W over the complement of {i} by iterating all masks and
        // skipping those containing i.
        for (std::size_t mask = 0; mask <= full; ++mask) {
            if (mask & bit) continue;
            const std::size_t size = static_cast<std::size_t>(std::popcount(mask));
            acc += inv_choose[size] * (v[mask | bit] - v[mask]);
        }
        res.s[i] = acc / static_cast<double>(p);
    }
    res.phi_total = v[full] - v[0];
    return res;
}

AttributionResult shapley_sampled(const DiagnosisModel& model, std::span<const double> e,
                                  const Transform& m, std::size_t permutations,
                                  std::uint64_t seed, const CeOptions& opt) {
    const std::size_t p = model.num_coords();
    if (p == 0) throw ModelError("model has no coordinates");
    if (permutations < 2 || permutations % 2 != 0) {
        throw ModelError("sampled Shapley requires an even permutation count >= 2");
    }
    if (p > 63) throw ModelError("sampled Shapley limited to p <= 63");
    const std::size_t pairs = permutations / 2;

    // Subset values are deterministic under every expectation mode, so a
    // cache keyed by mask removes repeated work across permutations. Small p
    // gets a dense table; larger p a hash map.
    const bool dense = p <= 20;
    std::vector<double> dense_cache;
    if (dense) {
        dense_cache.assign(std::uint64_t{1} << p, std::numeric_limits<double>::quiet_NaN());
    }
    std::unordered_map<std::uint64_t, double> sparse_cache;
    std::vector<std::size_t> W;
    auto compute = [&](std::uint64_t mask) {
        W.clear();
        for (std::size_t c = 0; c < p; ++c) {
            if (mask & (std::uint64_t{1} << c)) W.push_back(c);
        }
        return subset_value(model, e, W, m, opt);
    };
    auto value_of = [&](std::uint64_t mask) {
        if (dense) {
            double& slot = dense_cache[mask];
            if (std::isnan(slot)) slot = compute(mask);
            return slot;
        }
        auto it = sparse_cache.find(mask);
        if (it == sparse_cache.end()) it = sparse_cache.emplace(mask, compute(mask)).first;
        return it->second;
    };

    // Welford accumulation of the pair-averaged contributions.
    std::vector<double> mean_contrib(p, 0.0);
    std::vector<double> m2(p, 0.0);
    std::vector<double> pair_contrib(p, 0.0);
    for (std::size_t t = 0; t < pairs; ++t) {
        Rng rng(derive_seed(seed, t));
        const std::vector<std::size_t> perm = rng.permutation(p);
        std::fill(pair_contrib.begin(), pair_contrib.end(), 0.0);
        for (int dir = 0; dir < 2; ++dir) {
            std::uint64_t mask = 0;
            double prev = value_of(0);
            for (std::size_t k = 0; k < p; ++k) {
                const std::size_t i = dir == 0 ? perm[k] : perm[p - 1 - k];
                const std::uint64_t next_mask = mask | (std::uint64_t{1} << i);
                const double next = value_of(next_mask);
                pair_contrib[i] += 0.5 * (next - prev);
                mask = next_mask;
                prev = next;
            }
        }
        const double count = static_cast<double>(t + 1);
        for (std::size_t i = 0; i < p; ++i) {
            const double delta = pair_contrib[i] - mean_contrib[i];
            mean_contrib[i] += delta / count;
            m2[i] += delta * (pair_contrib[i] - mean_contrib[i]);
        }
    }

    AttributionResult res;
    res.transform = m.kind;
    res.sampled = true;
    res.permutations = permutations;
    res.seed = seed;
    res.model_fingerprint = model.fingerprint();
    res.s = mean_contrib;
    res.stderrs.assign(p, 0.0);
    if (pairs > 1) {
        for (std::size_t i = 0; i < p; ++i) {
            res.stderrs[i] = std::sqrt(m2[i] / static_cast<double>(pairs - 1) /
                                       static_cast<double>(pairs));
        }
    }
    res.phi_total = value_of((std::uint64_t{1} << p) - 1) - value_of(0);

    // Local accuracy is a hard contract: push the (rounding-level) residual
    // back into the coordinates, weighted by their standard errors.
    const double sum_s = std::accumulate(res.s.begin(), res.s.end(), 0.0);
    res.residual = res.phi_total - sum_s;
    if (res.residual != 0.0) {
        const double total_se = std::accumulate(res.stderrs.begin(), res.stderrs.end(), 0.0);
        for (std::size_t i = 0; i < p; ++i) {
            const double share = total_se > 0.0 ? res.stderrs[i] / total_se
                                                : 1.0 / static_cast<double>(p);
            res.s[i] += res.residual * share;
        }
        res.residual_adjusted = true;
    }
    return res;
}

PrevalenceShiftReport prevalence_shift_check(const DiagnosisModel& model,
                                             std::span<const double> e, double c,
                                             const CeOptions& opt) {
    const Transform m = Transform::logit();
    PrevalenceShiftReport rep;
    rep.offset = c;
    rep.s = shapley_exact(model, e, m, opt).s;
    rep.s_shifted = shapley_exact(model.with_logit_offset(c), e, m, opt).s;
    for (std::size_t i = 0; i < rep.s.size(); ++i) {
        rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(rep.s[i] - rep.s_shifted[i]));
    }
    return rep;
}

std::vector<std::size_t> ranked_coords(const AttributionResult& result) {
    std::vector<std::size_t> idx(result.s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&result](std::size_t a, std::size_t b) {
        if (result.s[a] != result.s[b]) return result.s[a] > result.s[b];
        return a < b;
    });
    return idx;
}

}  // namespace rca
