#include "rca/common.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

namespace rca {

double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double rmse(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty()) {
        throw ModelError("rmse: length mismatch or empty input");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw ModelError("pearson: length mismatch or too few rows");
    }
    const double ma = mean(a);
    const double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b,
                              std::size_t dim, const std::string& context) {
    // In-place lower Cholesky with a relative pivot floor.
    double max_diag = 0.0;
    for (std::size_t i = 0; i < dim; ++i) max_diag = std::max(max_diag, std::abs(a[i * dim + i]));
    const double floor = std::max(max_diag, 1.0) * 1e-13;

    for (std::size_t j = 0; j < dim; ++j) {
        double d = a[j * dim + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * dim + k] * a[j * dim + k];
        if (d <= floor) {
            throw ModelError("singular fit: " + context);
        }
        const double l = std::sqrt(d);
        a[j * dim + j] = l;
        for (std::size_t i = j + 1; i < dim; ++i) {
            double s = a[i * dim + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * dim + k] * a[j * dim + k];
            a[i * dim + j] = s / l;
        }
    }
    // Forward then backward substitution.
    for (std::size_t i = 0; i < dim; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * dim + k] * b[k];
        b[i] = s / a[i * dim + i];
    }
    for (std::size_t ii = dim; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double s = b[i];
        for (std::size_t k = i + 1; k < dim; ++k) s -= a[k * dim + i] * b[k];
        b[i] = s / a[i * dim + i];
    }
    return b;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t worker_count = threads > 0
        ? static_cast<std::size_t>(threads)
        : std::max(1u, std::thread::hardware_concurrency());
    worker_count = std::min<std::size_t>({worker_count, n, 64});
    if (worker_count <= 1) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + worker_count - 1) / worker_count;
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t w = 0; w < worker_count; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, &first_error, &error_mutex, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rca
