#include "lesann/metrics.hpp"

#include "lesann/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lesann {

void MatchConfig::validate() const {
    if (!(hit_threshold > 0.0 && hit_threshold <= 1.0)) throw ValidationError("hit threshold must lie in (0, 1]");
}

namespace {

std::vector<std::int64_t> label_sizes(const LabelVolume& gt) {
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(gt.num_labels()) + 1, 0);
    for (auto l : gt.data)
        if (l > 0) ++sizes[static_cast<std::size_t>(l)];
    return sizes;
}

double overlap_score(std::int64_t inter, std::int64_t a, std::int64_t b, OverlapCriterion c) {
    if (inter == 0) return 0.0;
    if (c == OverlapCriterion::iou) return static_cast<double>(inter) / static_cast<double>(a + b - inter);
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a + b);
}

void check_grid(const LesionCandidate& c, const LabelVolume& gt) {
    const auto n = static_cast<std::int64_t>(gt.data.size());
    for (auto i : c.voxels)
        if (i < 0 || i >= n) throw ValidationError("candidate voxel lies outside the ground-truth grid");
}

} // namespace

MatchResult match_candidates(const std::vector<LesionCandidate>& candidates, const LabelVolume& gt,
                             const MatchConfig& cfg) {
    cfg.validate();
    const auto sizes = label_sizes(gt);
    const int labels = static_cast<int>(sizes.size()) - 1;
    std::vector<bool> claimed(sizes.size(), false);
    std::vector<std::int64_t> inter(sizes.size(), 0);

    MatchResult out;
    for (std::size_t rank = 0; rank < candidates.size(); ++rank) {
        const auto& cand = candidates[rank];
        check_grid(cand, gt);
        std::fill(inter.begin(), inter.end(), 0);
        for (auto i : cand.voxels) ++inter[static_cast<std::size_t>(gt[i])];

        int best_label = 0;
        double best = 0.0;
        for (int l = 1; l <= labels; ++l) {
            if (claimed[static_cast<std::size_t>(l)]) continue;
            const double o = overlap_score(inter[static_cast<std::size_t>(l)], static_cast<std::int64_t>(cand.size()),
                                           sizes[static_cast<std::size_t>(l)], cfg.criterion);
            if (o > best) {
                best = o;
                best_label = l;
            }
        }
        if (best_label > 0 && best >= cfg.hit_threshold) {
            claimed[static_cast<std::size_t>(best_label)] = true;
            out.pairs.push_back({static_cast<int>(rank), best_label, best});
        } else {
            out.unmatched_candidates.push_back(static_cast<int>(rank));
        }
    }
    for (int l = 1; l <= labels; ++l)
        if (!claimed[static_cast<std::size_t>(l)]) out.unmatched_gt.push_back(l);
    return out;
}

MatchedCase match_case(const EvalCase& c, const MatchConfig& cfg) {
    auto ranked = c.candidates;
    std::stable_sort(ranked.begin(), ranked.end(), [](const LesionCandidate& a, const LesionCandidate& b) {
        return a.peak_confidence > b.peak_confidence;
    });
    const auto m = match_candidates(ranked, c.gt, cfg);
    MatchedCase out;
    out.gt_lesions = c.gt.num_labels();
    for (const auto& p : m.pairs) out.hit_confidences.push_back(ranked[static_cast<std::size_t>(p.candidate_rank)].peak_confidence);
    for (int r : m.unmatched_candidates) out.fp_confidences.push_back(ranked[static_cast<std::size_t>(r)].peak_confidence);
    return out;
}

FrocCurve froc_from_matches(std::span<const MatchedCase> cases) {
    if (cases.empty()) throw ValidationError("FROC needs at least one case");
    std::int64_t total_gt = 0;
    struct Event {
        double confidence;
        bool hit;
    };
    std::vector<Event> events;
    for (const auto& c : cases) {
        total_gt += c.gt_lesions;
        for (double v : c.hit_confidences) events.push_back({v, true});
        for (double v : c.fp_confidences) events.push_back({v, false});
    }
    if (total_gt == 0) throw ValidationError("FROC undefined: no ground-truth lesions");
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.confidence > b.confidence; });

    FrocCurve curve;
    std::int64_t hits = 0, fps = 0;
    const auto n_cases = static_cast<double>(cases.size());
    for (std::size_t i = 0; i < events.size();) {
        const double t = events[i].confidence;
        for (; i < events.size() && events[i].confidence == t; ++i) (events[i].hit ? hits : fps) += 1;
        curve.points.push_back({t, static_cast<double>(fps) / n_cases, static_cast<double>(hits) / static_cast<double>(total_gt)});
    }
    return curve;
}

FrocCurve froc(std::span<const EvalCase> cases, const MatchConfig& cfg) {
    std::vector<MatchedCase> matched;
    matched.reserve(cases.size());
    for (const auto& c : cases) matched.push_back(match_case(c, cfg));
    return froc_from_matches(matched);
}

FrocPoint froc_point_at(std::span<const MatchedCase> cases, double threshold) {
    if (cases.empty()) throw ValidationError("FROC needs at least one case");
    std::int64_t hits = 0, fps = 0, total_gt = 0;
    for (const auto& c : cases) {
        total_gt += c.gt_lesions;
        hits += std::count_if(c.hit_confidences.begin(), c.hit_confidences.end(), [&](double v) { return v >= threshold; });
        fps += std::count_if(c.fp_confidences.begin(), c.fp_confidences.end(), [&](double v) { return v >= threshold; });
    }
    if (total_gt == 0) throw ValidationError("FROC undefined: no ground-truth lesions");
    return {threshold, static_cast<double>(fps) / static_cast<double>(cases.size()),
            static_cast<double>(hits) / static_cast<double>(total_gt)};
}

double FrocCurve::sensitivity_at(double fp) const {
    double s = 0.0;
    for (const auto& p : points) {
        if (p.fp_per_case > fp) break;
        s = p.sensitivity;
    }
    return s;
}

double pauc(const FrocCurve& curve, double lo, double hi) {
    if (curve.points.empty()) throw ValidationError("pAUC of an empty FROC curve");
    if (!(lo < hi)) throw ValidationError("pAUC bounds must satisfy lo < hi");
    double area = 0.0;
    double prev = lo;
    double current = curve.sensitivity_at(lo);
    for (const auto& p : curve.points) {
        if (p.fp_per_case <= lo) continue;
        if (p.fp_per_case >= hi) break;
        area += current * (p.fp_per_case - prev);
        prev = p.fp_per_case;
        current = p.sensitivity;
    }
    return area + current * (hi - prev);
}

RocCurve roc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ValidationError("scores and labels differ in length");
    std::int64_t pos = 0, neg = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1");
        (l ? pos : neg) += 1;
    }
    if (pos == 0 || neg == 0) throw ValidationError("ROC needs both classes");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double t = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == t; ++i) (labels[order[i]] ? tp : fp) += 1;
        curve.points.push_back({t, static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos)});
    }
    return curve;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
    const auto curve = roc(scores, labels);
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return area;
}

double RocCurve::tpr_at(double fpr) const {
    double best = 0.0;
    for (const auto& p : points)
        if (p.fpr <= fpr) best = std::max(best, p.tpr);
    return best;
}

double case_score(const std::vector<LesionCandidate>& candidates) {
    double best = 0.0;
    for (const auto& c : candidates) best = std::max(best, c.peak_confidence);
    return best;
}

double dice_from_counts(std::int64_t intersection, std::int64_t size_a, std::int64_t size_b) {
    if (size_a + size_b == 0) return 1.0;
    return 2.0 * static_cast<double>(intersection) / static_cast<double>(size_a + size_b);
}

double dice(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.size() != b.size()) throw ValidationError("dice: masks are on different grids");
    std::int64_t inter = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool x = a[i] != 0, y = b[i] != 0;
        na += x;
        nb += y;
        inter += x && y;
    }
    return dice_from_counts(inter, na, nb);
}

double dice(const LabelVolume& a, const LabelVolume& b) {
    if (a.dims != b.dims) throw ValidationError("dice: masks are on different grids");
    std::vector<std::uint8_t> ma(a.data.size()), mb(b.data.size());
    for (std::size_t i = 0; i < ma.size(); ++i) {
        ma[i] = a.data[i] != 0;
        mb[i] = b.data[i] != 0;
    }
    return dice(ma, mb);
}

DscSummary dsc_report(std::span<const EvalCase> cases, const MatchConfig& cfg, bool include_missed) {
    DscSummary out;
    std::vector<double> included;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& c = cases[ci];
        const auto sizes = label_sizes(c.gt);
        const double voxel_cm3 = voxel_volume_cm3(c.gt.spacing);
        const auto m = match_candidates(c.candidates, c.gt, cfg);

        std::vector<std::optional<double>> per_label(sizes.size());
        for (const auto& p : m.pairs) {
            const auto& cand = c.candidates[static_cast<std::size_t>(p.candidate_rank)];
            std::int64_t inter = 0;
            for (auto i : cand.voxels) inter += c.gt[i] == p.gt_label;
            per_label[static_cast<std::size_t>(p.gt_label)] =
                dice_from_counts(inter, static_cast<std::int64_t>(cand.size()), sizes[static_cast<std::size_t>(p.gt_label)]);
        }
        for (std::size_t l = 1; l < sizes.size(); ++l) {
            LesionDsc lesion{static_cast<int>(ci), static_cast<int>(l), static_cast<double>(sizes[l]) * voxel_cm3, per_label[l]};
            ++out.lesions;
            if (lesion.dsc) {
                ++out.matched;
                included.push_back(*lesion.dsc);
            } else if (include_missed) {
                included.push_back(0.0);
            }
            out.per_lesion.push_back(lesion);
        }
    }
    if (!included.empty()) {
        const double n = static_cast<double>(included.size());
        const double mean = std::accumulate(included.begin(), included.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : included) ss += (v - mean) * (v - mean);
        out.mean = mean;
        out.std_dev = std::sqrt(ss / n);
    }
    return out;
}

double sensitivity_at_fp(const FrocCurve& curve, double fp_per_case) {
    if (curve.points.empty()) throw ValidationError("operating point on an empty FROC curve");
    if (!(fp_per_case >= 0.0)) throw ValidationError("false positives per case must be non-negative");
    return curve.sensitivity_at(fp_per_case);
}

double specificity_at_sensitivity(const RocCurve& curve, double sensitivity) {
    double best = -1.0;
    for (const auto& p : curve.points)
        if (p.tpr >= sensitivity) best = std::max(best, 1.0 - p.fpr);
    if (best < 0.0) throw ValidationError("sensitivity " + std::to_string(sensitivity) + " is not reached by the ROC curve");
    return best;
}

} // namespace lesann
