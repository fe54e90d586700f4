#pragma once

#include <string>
#include <utility>
#include <vector>

namespace lesann {

// Performance reached with a given number of manually annotated exams.
struct BudgetPoint {
    double n_manual = 0.0;
    double performance = 0.0;
};

struct RequiredAnnotations {
    double n_semi = 0.0;
    std::size_t bracket = 0; // index of the lower point of the bracketing pair
    bool ambiguous = false;  // more than one bracket contained the target
};

// Annotations needed to reach `perf_supervised`, interpolating performance
// linearly in log(n) between the two bracketing budgets:
//   N = N_a * (N_b / N_a)^((perf - perf_a) / (perf_b - perf_a)).
// Points must be sorted by n_manual; no extrapolation.
RequiredAnnotations required_annotations(const std::vector<BudgetPoint>& points, double perf_supervised);

double efficiency_ratio(double n_supervised, double n_semi);

// Performance at budget n on the piecewise log-linear interpolant.
double interpolated_performance(const std::vector<BudgetPoint>& points, double n);

// `samples_per_segment` log-spaced samples per bracket (including endpoints).
std::vector<BudgetPoint> interpolation_samples(const std::vector<BudgetPoint>& points, int samples_per_segment);

// Collapses repeated budgets to the mean performance and sorts by budget.
std::vector<BudgetPoint> average_by_budget(const std::vector<BudgetPoint>& points);

} // namespace lesann
