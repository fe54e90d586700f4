#pragma once

#include "lesann/kernels.hpp"
#include "lesann/metrics.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lesann {

// Reporting default for significance; nothing in the computations uses it.
inline constexpr double kSignificanceLevel = 0.01;
inline constexpr std::int64_t kDefaultIterations = 10000;

struct RunGroup {
    std::string name;
    std::vector<double> values; // one metric value per independent run
};

struct PermutationResult {
    double statistic = 0.0; // mean(a) - mean(b)
    double p = 1.0;         // one-sided, add-one smoothed
    std::int64_t iterations = 0;
    std::uint64_t seed = 0;
};

// Probability of observing a mean difference at least as favourable to `a`
// under random relabelling: (1 + #{d* > d}) / (1 + iterations).
PermutationResult permutation_test(const RunGroup& a, const RunGroup& b, std::int64_t iterations, std::uint64_t seed);

using BootstrapMetric = kernels::MetricFn;

// Named metrics usable from the CLI: "auroc" and "mean".
BootstrapMetric bootstrap_metric(const std::string& name);

struct BootstrapResult {
    double lo = 0.0;
    double hi = 0.0;
    double point = 0.0; // metric on the full data
    std::int64_t iterations = 0;
    std::int64_t rejected = 0;
    std::uint64_t seed = 0;
};

BootstrapResult bootstrap_ci(std::span<const double> values, std::span<const int> labels, const BootstrapMetric& metric,
                             std::int64_t iterations, std::uint64_t seed);

// Linear-interpolated percentile (q in [0, 100]) of unsorted data.
double percentile(std::vector<double> data, double q);

// Step curve as ascending x with right-continuous y.
using StepCurve = std::vector<std::pair<double, double>>;

double step_value(const StepCurve& curve, double x);

StepCurve to_step(const FrocCurve& curve); // (fp_per_case, sensitivity)
StepCurve to_step(const RocCurve& curve);  // (fpr, tpr)

struct Band {
    std::vector<double> grid;
    std::vector<double> lo;
    std::vector<double> median;
    std::vector<double> hi;
};

// Pointwise 2.5 / 50 / 97.5 percentiles of curves resampled onto `grid`.
Band band(std::span<const StepCurve> curves, std::span<const double> grid);

} // namespace lesann
