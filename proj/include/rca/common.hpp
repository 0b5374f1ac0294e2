#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

// ---------------------------------------------------------------------------
// Error taxonomy. ConfigError marks bad user input (CLI exit code 2);
// everything else is a pipeline failure (exit code 3).
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration, paths, or parameter values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Structural defects in a graph: cycles, bad indices, duplicate edges.
class GraphError : public Error {
public:
    using Error::Error;
};

/// Model contract violations: arity mismatches, degenerate labels,
/// singular fits, non-convergence.
class ModelError : public Error {
public:
    using Error::Error;
};

/// Operation requested on a model class that cannot support it.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Conditioning event has probability zero.
class EvidenceError : public Error {
public:
    using Error::Error;
};

/// Backtracking kernel failed one of the construction desiderata.
class KernelError : public Error {
public:
    KernelError(std::string desideratum, const std::string& msg)
        : Error(desideratum + ": " + msg), desideratum_(std::move(desideratum)) {}
    const std::string& desideratum() const { return desideratum_; }

private:
    std::string desideratum_;
};

// ---------------------------------------------------------------------------
// Seeding and random draws. All draws bottom out in mt19937_64, whose output
// sequence is fixed by the standard; the scalar transforms below avoid the
// implementation-defined std::*_distribution classes so that equal seeds give
// equal bytes everywhere.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Disjoint deterministic seed stream: stream k of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform on [0,1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Box-Muller; consumes exactly two uniforms per call.
    double gaussian(double mu, double sigma) {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return mu + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Inverse-CDF Laplace draw with scale b.
    double laplace(double mu, double b) {
        double u = uniform01();
        if (u < 0.5) {
            return mu + b * std::log(std::max(2.0 * u, 1e-300));
        }
        return mu - b * std::log(std::max(2.0 * (1.0 - u), 1e-300));
    }

    /// Uniform integer in [0,n) by rejection.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % static_cast<std::uint64_t>(n);
        std::uint64_t x = eng_();
        while (x >= bound) x = eng_();
        return static_cast<std::size_t>(x % n);
    }

    /// Fisher-Yates permutation of [0,n).
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            std::swap(p[i - 1], p[index(i)]);
        }
        return p;
    }

private:
    std::mt19937_64 eng_;
};

// ---------------------------------------------------------------------------
// Numeric helpers.
// ---------------------------------------------------------------------------

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double t = std::exp(z);
    return t / (1.0 + t);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // sample variance, ddof = 1
double rmse(std::span<const double> a, std::span<const double> b);
double pearson(std::span<const double> a, std::span<const double> b);

/// FNV-1a over bytes; used for provenance fingerprints, not security.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Deterministic, context-named SPD solve (Cholesky). `a` is row-major
/// dim x dim; throws ModelError naming `context` when a pivot collapses.
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b,
                              std::size_t dim, const std::string& context);

/// Runs fn(begin, end) over contiguous chunks of [0,n). threads = 0 picks
/// the hardware count. Chunk boundaries are deterministic; callers must
/// write only to disjoint slots so results are thread-count independent.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Row-major matrix of doubles; the data interchange type between modules.
// ---------------------------------------------------------------------------

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows);
        for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, c);
        return out;
    }
};

}  // namespace rca
