#include "kernels_detail.hpp"

#include <exception>

namespace lesann::kernels::omp {

void ensemble_mean(std::span<const std::span<const float>> maps, std::span<float> out) {
    const double inv = 1.0 / static_cast<double>(maps.size());
    const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const auto& m : maps) sum += m[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = static_cast<float>(sum * inv);
    }
}

void rician_noise(std::span<const float> in, double sigma, std::uint64_t seed, std::span<float> out) {
    const auto n = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = detail::rician_voxel(in[k], sigma, seed, k);
    }
}

std::int64_t permutation_exceedances(std::span<const double> pooled, std::size_t n_a, double observed,
                                     std::int64_t iterations, std::uint64_t seed) {
    std::int64_t count = 0;
#pragma omp parallel reduction(+ : count)
    {
        std::vector<double> scratch;
#pragma omp for schedule(static)
        for (std::int64_t it = 0; it < iterations; ++it) {
            const double d = detail::permuted_difference(pooled, n_a, scratch, seed, static_cast<std::uint64_t>(it));
            count += exceeds(d, observed);
        }
    }
    return count;
}

BootstrapDraws bootstrap_replicates(std::span<const double> values, std::span<const int> labels,
                                    const MetricFn& metric, std::int64_t iterations, std::uint64_t seed) {
    BootstrapDraws out;
    out.replicates.resize(static_cast<std::size_t>(iterations));
    std::int64_t rejected = 0;
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : rejected)
    for (std::int64_t it = 0; it < iterations; ++it) {
        try {
            const auto r = detail::bootstrap_one(values, labels, metric, seed, static_cast<std::uint64_t>(it));
            out.replicates[static_cast<std::size_t>(it)] = r.value;
            rejected += r.rejected;
        } catch (...) {
#pragma omp critical(lesann_bootstrap_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    out.rejected = rejected;
    return out;
}

} // namespace lesann::kernels::omp
