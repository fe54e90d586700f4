#include "kernels_detail.hpp"

namespace lesann::kernels::serial {

void ensemble_mean(std::span<const std::span<const float>> maps, std::span<float> out) {
    const double inv = 1.0 / static_cast<double>(maps.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double sum = 0.0;
        for (const auto& m : maps) sum += m[i];
        out[i] = static_cast<float>(sum * inv);
    }
}

void rician_noise(std::span<const float> in, double sigma, std::uint64_t seed, std::span<float> out) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = detail::rician_voxel(in[i], sigma, seed, i);
}

std::int64_t permutation_exceedances(std::span<const double> pooled, std::size_t n_a, double observed,
                                     std::int64_t iterations, std::uint64_t seed) {
    std::vector<double> scratch;
    std::int64_t count = 0;
    for (std::int64_t it = 0; it < iterations; ++it) {
        const double d = detail::permuted_difference(pooled, n_a, scratch, seed, static_cast<std::uint64_t>(it));
        count += exceeds(d, observed);
    }
    return count;
}

BootstrapDraws bootstrap_replicates(std::span<const double> values, std::span<const int> labels,
                                    const MetricFn& metric, std::int64_t iterations, std::uint64_t seed) {
    BootstrapDraws out;
    out.replicates.resize(static_cast<std::size_t>(iterations));
    for (std::int64_t it = 0; it < iterations; ++it) {
        const auto r = detail::bootstrap_one(values, labels, metric, seed, static_cast<std::uint64_t>(it));
        out.replicates[static_cast<std::size_t>(it)] = r.value;
        out.rejected += r.rejected;
    }
    return out;
}

} // namespace lesann::kernels::serial
