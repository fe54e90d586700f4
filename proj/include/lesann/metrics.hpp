#pragma once

#include "lesann/extraction.hpp"
#include "lesann/volume.hpp"

#include <optional>
#include <span>
#include <vector>

namespace lesann {

enum class OverlapCriterion { iou, dice };

struct MatchConfig {
    double hit_threshold = 0.10;
    OverlapCriterion criterion = OverlapCriterion::iou;

    void validate() const;
};

struct MatchPair {
    int candidate_rank = 0; // position in the candidate list
    int gt_label = 0;       // 1-based
    double overlap = 0.0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<int> unmatched_candidates; // ranks
    std::vector<int> unmatched_gt;         // labels
};

// Greedy one-to-one matching in candidate list order: each candidate claims
// the unclaimed GT lesion with the highest overlap, ties to the lower label.
MatchResult match_candidates(const std::vector<LesionCandidate>& candidates, const LabelVolume& gt,
                             const MatchConfig& cfg = {});

// One evaluated case: candidates (any order) plus ground truth.
struct EvalCase {
    std::vector<LesionCandidate> candidates;
    LabelVolume gt;
};

struct FrocPoint {
    double threshold = 0.0;
    double fp_per_case = 0.0;
    double sensitivity = 0.0;
};

struct FrocCurve {
    std::vector<FrocPoint> points; // ascending fp_per_case (descending threshold)

    // Right-continuous step value: sensitivity of the last point with
    // fp_per_case <= fp, 0 before the first point.
    double sensitivity_at(double fp) const;
};

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // from (0, 0) to (1, 1)

    // Highest tpr among points with fpr <= x.
    double tpr_at(double fpr) const;
};

// Per-case match state reused for FROC construction at many thresholds.
struct MatchedCase {
    std::vector<double> hit_confidences; // one per matched GT lesion
    std::vector<double> fp_confidences;  // one per unmatched candidate
    int gt_lesions = 0;
};

MatchedCase match_case(const EvalCase& c, const MatchConfig& cfg);

FrocCurve froc(std::span<const EvalCase> cases, const MatchConfig& cfg = {});
FrocCurve froc_from_matches(std::span<const MatchedCase> cases);

// (fp_per_case, sensitivity) counted at an explicit confidence threshold.
FrocPoint froc_point_at(std::span<const MatchedCase> cases, double threshold);

double pauc(const FrocCurve& curve, double lo = 0.0, double hi = 1.0);

RocCurve roc(std::span<const double> scores, std::span<const int> labels);
double auroc(std::span<const double> scores, std::span<const int> labels);

// Maximum peak confidence, 0 when there are no candidates.
double case_score(const std::vector<LesionCandidate>& candidates);

// 2|a n b| / (|a| + |b|); 1 when both are empty. Nonzero = foreground.
double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
double dice(const LabelVolume& a, const LabelVolume& b);
double dice_from_counts(std::int64_t intersection, std::int64_t size_a, std::int64_t size_b);

struct LesionDsc {
    int case_index = 0;
    int gt_label = 0;
    double volume_cm3 = 0.0;
    std::optional<double> dsc; // nullopt when the lesion was missed
};

struct DscSummary {
    std::optional<double> mean;
    std::optional<double> std_dev; // population standard deviation
    int lesions = 0;
    int matched = 0;
    std::vector<LesionDsc> per_lesion;
};

DscSummary dsc_report(std::span<const EvalCase> cases, const MatchConfig& cfg, bool include_missed);

// Operating points read off step-interpolated curves.
double sensitivity_at_fp(const FrocCurve& curve, double fp_per_case);
// Highest specificity among ROC points with tpr >= sensitivity.
double specificity_at_sensitivity(const RocCurve& curve, double sensitivity);

} // namespace lesann
