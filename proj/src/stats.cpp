#include "lesann/stats.hpp"

#include "lesann/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lesann {

namespace {

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

} // namespace

PermutationResult permutation_test(const RunGroup& a, const RunGroup& b, std::int64_t iterations, std::uint64_t seed) {
    if (a.values.size() < 2 || b.values.size() < 2)
        throw ValidationError("permutation test needs at least two runs per group");
    if (iterations < 1) throw ValidationError("permutation test needs a positive iteration count");

    std::vector<double> pooled = a.values;
    pooled.insert(pooled.end(), b.values.begin(), b.values.end());

    PermutationResult out;
    out.statistic = mean(a.values) - mean(b.values);
    out.iterations = iterations;
    out.seed = seed;
    const auto exceed = kernels::omp::permutation_exceedances(pooled, a.values.size(), out.statistic, iterations, seed);
    out.p = static_cast<double>(1 + exceed) / static_cast<double>(1 + iterations);
    return out;
}

BootstrapMetric bootstrap_metric(const std::string& name) {
    if (name == "auroc")
        return [](std::span<const double> v, std::span<const int> l) { return auroc(v, l); };
    if (name == "mean")
        return [](std::span<const double> v, std::span<const int>) { return mean(v); };
    throw ValidationError("unknown bootstrap metric '" + name + "'");
}

double percentile(std::vector<double> data, double q) {
    if (data.empty()) throw ValidationError("percentile of empty data");
    std::sort(data.begin(), data.end());
    const double pos = q / 100.0 * static_cast<double>(data.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, data.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return data[lo] + (data[hi] - data[lo]) * frac;
}

BootstrapResult bootstrap_ci(std::span<const double> values, std::span<const int> labels, const BootstrapMetric& metric,
                             std::int64_t iterations, std::uint64_t seed) {
    if (values.size() != labels.size()) throw ValidationError("bootstrap values and labels differ in length");
    if (iterations < 100) throw ValidationError("bootstrap needs at least 100 iterations");
    bool pos = false, neg = false;
    for (int l : labels) {
        if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1");
        (l ? pos : neg) = true;
    }
    if (!(pos && neg)) throw ValidationError("bootstrap needs both classes");

    const auto draws = kernels::omp::bootstrap_replicates(values, labels, metric, iterations, seed);
    BootstrapResult out;
    out.point = metric(values, labels);
    out.lo = percentile(draws.replicates, 2.5);
    out.hi = percentile(draws.replicates, 97.5);
    out.iterations = iterations;
    out.rejected = draws.rejected;
    out.seed = seed;
    return out;
}

double step_value(const StepCurve& curve, double x) {
    double y = 0.0;
    for (const auto& [px, py] : curve) {
        if (px > x) break;
        y = py;
    }
    return y;
}

StepCurve to_step(const FrocCurve& curve) {
    StepCurve out;
    for (const auto& p : curve.points) out.emplace_back(p.fp_per_case, p.sensitivity);
    return out;
}

StepCurve to_step(const RocCurve& curve) {
    StepCurve out;
    for (const auto& p : curve.points) out.emplace_back(p.fpr, p.tpr);
    return out;
}

Band band(std::span<const StepCurve> curves, std::span<const double> grid) {
    if (curves.size() < 2) throw ValidationError("a confidence band needs at least two curves");
    if (grid.empty()) throw ValidationError("a confidence band needs a non-empty grid");
    Band out;
    out.grid.assign(grid.begin(), grid.end());
    std::vector<double> column(curves.size());
    for (double x : grid) {
        for (std::size_t c = 0; c < curves.size(); ++c) column[c] = step_value(curves[c], x);
        out.lo.push_back(percentile(column, 2.5));
        out.median.push_back(percentile(column, 50.0));
        out.hi.push_back(percentile(column, 97.5));
    }
    return out;
}

} // namespace lesann
