#pragma once

// Per-element bodies shared by the serial and OpenMP loops.

#include "lesann/error.hpp"
#include "lesann/kernels.hpp"
#include "lesann/random.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace lesann::kernels::detail {

inline float rician_voxel(float in, double sigma, std::uint64_t seed, std::uint64_t index) {
    StreamRng rng(seed, index);
    const double n1 = rng.normal();
    const double n2 = rng.normal();
    const double re = static_cast<double>(in) + sigma * n1;
    const double im = sigma * n2;
    return static_cast<float>(std::sqrt(re * re + im * im));
}

// Mean difference of one random split; `scratch` is overwritten.
inline double permuted_difference(std::span<const double> pooled, std::size_t n_a, std::vector<double>& scratch,
                                  std::uint64_t seed, std::uint64_t iteration) {
    scratch.assign(pooled.begin(), pooled.end());
    StreamRng rng(seed, iteration);
    const std::size_t n = scratch.size();
    for (std::size_t j = 0; j < n_a; ++j) {
        const std::size_t k = j + static_cast<std::size_t>(rng.below(n - j));
        std::swap(scratch[j], scratch[k]);
    }
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t j = 0; j < n_a; ++j) sum_a += scratch[j];
    for (std::size_t j = n_a; j < n; ++j) sum_b += scratch[j];
    return sum_a / static_cast<double>(n_a) - sum_b / static_cast<double>(n - n_a);
}

struct Replicate {
    double value = 0.0;
    std::int64_t rejected = 0;
};

inline Replicate bootstrap_one(std::span<const double> values, std::span<const int> labels, const MetricFn& metric,
                               std::uint64_t seed, std::uint64_t iteration) {
    StreamRng rng(seed, iteration);
    const std::size_t n = values.size();
    std::vector<double> v;
    std::vector<int> l;
    Replicate out;
    for (int attempt = 0; attempt < kMaxBootstrapAttempts; ++attempt) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(n));
        v.resize(k);
        l.resize(k);
        bool has_pos = false, has_neg = false;
        for (std::size_t j = 0; j < k; ++j) {
            const auto idx = static_cast<std::size_t>(rng.below(n));
            v[j] = values[idx];
            l[j] = labels[idx];
            (l[j] ? has_pos : has_neg) = true;
        }
        if (!(has_pos && has_neg)) {
            ++out.rejected;
            continue;
        }
        out.value = metric(v, l);
        return out;
    }
    throw ValidationError("bootstrap metric undefined: no two-class draw within the attempt limit");
}

} // namespace lesann::kernels::detail
