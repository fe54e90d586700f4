#include "lesann/kernels.hpp"
#include "lesann/metrics.hpp"
#include "lesann/random.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace lesann;

namespace {

std::vector<float> random_floats(std::size_t n, std::uint64_t seed) {
    StreamRng rng(seed, 0);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    return v;
}

// A 128x128x24 volume, the size of a resampled prostate crop.
constexpr std::size_t kVoxels = 128 * 128 * 24;

template <bool Parallel> void BM_EnsembleMean(benchmark::State& state) {
    std::vector<std::vector<float>> maps;
    for (std::uint64_t s = 0; s < 5; ++s) maps.push_back(random_floats(kVoxels, s));
    std::vector<std::span<const float>> views(maps.begin(), maps.end());
    std::vector<float> out(kVoxels);
    for (auto _ : state) {
        if constexpr (Parallel) kernels::omp::ensemble_mean(views, out);
        else kernels::serial::ensemble_mean(views, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel> void BM_RicianNoise(benchmark::State& state) {
    const auto in = random_floats(kVoxels, 1);
    std::vector<float> out(kVoxels);
    for (auto _ : state) {
        if constexpr (Parallel) kernels::omp::rician_noise(in, 0.01, 7, out);
        else kernels::serial::rician_noise(in, 0.01, 7, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel> void BM_Permutation(benchmark::State& state) {
    StreamRng rng(3, 0);
    std::vector<double> pooled(30);
    for (auto& x : pooled) x = rng.normal();
    for (auto _ : state) {
        std::int64_t n = Parallel ? kernels::omp::permutation_exceedances(pooled, 15, 0.3, 100000, 1)
                                  : kernels::serial::permutation_exceedances(pooled, 15, 0.3, 100000, 1);
        benchmark::DoNotOptimize(n);
    }
}

template <bool Parallel> void BM_Bootstrap(benchmark::State& state) {
    StreamRng rng(4, 0);
    std::vector<double> v(300);
    std::vector<int> l(300);
    for (std::size_t i = 0; i < v.size(); ++i) {
        l[i] = i % 3 == 0;
        v[i] = rng.uniform() + 0.3 * l[i];
    }
    const kernels::MetricFn metric = [](std::span<const double> s, std::span<const int> y) { return auroc(s, y); };
    for (auto _ : state) {
        auto d = Parallel ? kernels::omp::bootstrap_replicates(v, l, metric, 2000, 1)
                          : kernels::serial::bootstrap_replicates(v, l, metric, 2000, 1);
        benchmark::DoNotOptimize(d.replicates.data());
    }
}

} // namespace

BENCHMARK(BM_EnsembleMean<false>)->Name("ensemble_mean/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleMean<true>)->Name("ensemble_mean/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RicianNoise<false>)->Name("rician_noise/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RicianNoise<true>)->Name("rician_noise/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Permutation<false>)->Name("permutation/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Permutation<true>)->Name("permutation/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Bootstrap<false>)->Name("bootstrap/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bootstrap<true>)->Name("bootstrap/omp")->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
