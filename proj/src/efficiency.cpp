#include "lesann/efficiency.hpp"

#include "lesann/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lesann {

namespace {

void check_points(const std::vector<BudgetPoint>& points) {
    if (points.size() < 2) throw ValidationError("efficiency analysis needs at least two budget points");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].n_manual >= 1.0)) throw ValidationError("budget sizes must be at least 1");
        if (!std::isfinite(points[i].performance)) throw ValidationError("budget performance must be finite");
        if (i > 0 && !(points[i].n_manual > points[i - 1].n_manual))
            throw ValidationError("budget points must be sorted by strictly increasing n_manual");
    }
}

double log_interp(const BudgetPoint& a, const BudgetPoint& b, double perf) {
    const double exponent = (perf - a.performance) / (b.performance - a.performance);
    return a.n_manual * std::pow(b.n_manual / a.n_manual, exponent);
}

} // namespace

RequiredAnnotations required_annotations(const std::vector<BudgetPoint>& points, double perf_supervised) {
    check_points(points);
    RequiredAnnotations out;
    bool found = false;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = points[i + 1];
        const double lo = std::min(a.performance, b.performance);
        const double hi = std::max(a.performance, b.performance);
        if (perf_supervised < lo || perf_supervised > hi) continue;
        if (found) {
            // A target sitting exactly on the shared endpoint is not a second bracket.
            if (perf_supervised != a.performance) out.ambiguous = true;
            continue;
        }
        if (a.performance == b.performance) throw ValidationError("flat bracket: perf_a equals perf_b");
        out.n_semi = log_interp(a, b, perf_supervised);
        out.bracket = i;
        found = true;
    }
    if (!found) throw ValidationError("target performance lies outside the measured budget range");
    return out;
}

double efficiency_ratio(double n_supervised, double n_semi) {
    if (!(n_supervised > 0.0) || !(n_semi > 0.0)) throw ValidationError("annotation counts must be positive");
    return n_supervised / n_semi;
}

double interpolated_performance(const std::vector<BudgetPoint>& points, double n) {
    check_points(points);
    if (n < points.front().n_manual || n > points.back().n_manual)
        throw ValidationError("budget lies outside the measured range");
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = points[i + 1];
        if (n > b.n_manual) continue;
        const double t = std::log(n / a.n_manual) / std::log(b.n_manual / a.n_manual);
        return a.performance + t * (b.performance - a.performance);
    }
    return points.back().performance;
}

std::vector<BudgetPoint> interpolation_samples(const std::vector<BudgetPoint>& points, int samples_per_segment) {
    check_points(points);
    if (samples_per_segment < 2) throw ValidationError("need at least two samples per segment");
    std::vector<BudgetPoint> out;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const auto& a = points[i];
        const auto& b = points[i + 1];
        for (int s = i == 0 ? 0 : 1; s < samples_per_segment; ++s) {
            const double t = static_cast<double>(s) / (samples_per_segment - 1);
            out.push_back({a.n_manual * std::pow(b.n_manual / a.n_manual, t), a.performance + t * (b.performance - a.performance)});
        }
    }
    return out;
}

std::vector<BudgetPoint> average_by_budget(const std::vector<BudgetPoint>& points) {
    std::map<double, std::pair<double, int>> acc;
    for (const auto& p : points) {
        auto& [sum, n] = acc[p.n_manual];
        sum += p.performance;
        ++n;
    }
    std::vector<BudgetPoint> out;
    for (const auto& [budget, sn] : acc) out.push_back({budget, sn.first / sn.second});
    return out;
}

} // namespace lesann
