#pragma once

// Data-parallel inner loops. Every kernel exists twice with identical
// signatures: `serial` is the reference used by tests, `omp` is the
// OpenMP version the library calls. Both must produce bit-identical output
// for the same inputs, so random draws come from per-element or
// per-iteration StreamRng substreams, never from a shared engine.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace lesann::kernels {

using MetricFn = std::function<double(std::span<const double> values, std::span<const int> labels)>;

struct BootstrapDraws {
    std::vector<double> replicates; // one per iteration, in iteration order
    std::int64_t rejected = 0;      // single-class draws that were redrawn
};

// Cap on redraws per bootstrap iteration before giving up.
inline constexpr int kMaxBootstrapAttempts = 10000;

#define LESANN_KERNEL_DECLS                                                                                   \
    /* Voxelwise arithmetic mean of equally sized maps. */                                                    \
    void ensemble_mean(std::span<const std::span<const float>> maps, std::span<float> out);                   \
    /* out[i] = sqrt((in[i] + s*n1)^2 + (s*n2)^2), n1, n2 from substream i. */                                \
    void rician_noise(std::span<const float> in, double sigma, std::uint64_t seed, std::span<float> out);     \
    /* Number of random splits of `pooled` into (n_a, rest) whose mean difference exceeds `observed`. */      \
    std::int64_t permutation_exceedances(std::span<const double> pooled, std::size_t n_a, double observed,    \
                                         std::int64_t iterations, std::uint64_t seed);                        \
    /* Bootstrap replicates with k ~ U{1..N} resampled cases; single-class draws are redrawn. */              \
    BootstrapDraws bootstrap_replicates(std::span<const double> values, std::span<const int> labels,          \
                                        const MetricFn& metric, std::int64_t iterations, std::uint64_t seed);

namespace serial {
LESANN_KERNEL_DECLS
}

namespace omp {
LESANN_KERNEL_DECLS
}

#undef LESANN_KERNEL_DECLS

// Tolerance used when comparing a permuted statistic with the observed one.
inline bool exceeds(double permuted, double observed) {
    return permuted > observed + 1e-12 * (1.0 + (observed < 0 ? -observed : observed));
}

} // namespace lesann::kernels
