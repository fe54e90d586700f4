#include "lesann/annotate.hpp"

#include "lesann/error.hpp"
#include "lesann/kernels.hpp"

#include <algorithm>

namespace lesann {

const char* to_string(AnnotationStatus s) {
    switch (s) {
    case AnnotationStatus::annotated: return "annotated";
    case AnnotationStatus::excluded: return "excluded";
    case AnnotationStatus::negative: return "negative";
    }
    return "unknown";
}

Volume ensemble_average(std::span<const Volume> maps) {
    if (maps.empty()) throw ValidationError("ensemble_average needs at least one map");
    for (const auto& m : maps) {
        m.validate();
        if (m.dims != maps.front().dims || m.spacing != maps.front().spacing)
            throw ValidationError("ensemble members differ in dims or spacing");
    }
    Volume out = Volume::filled(maps.front().dims, maps.front().spacing);
    std::vector<std::span<const float>> views;
    views.reserve(maps.size());
    for (const auto& m : maps) views.emplace_back(m.data);
    kernels::omp::ensemble_mean(views, out.data);
    return out;
}

std::vector<LesionCandidate> rank_for_annotation(std::vector<LesionCandidate> candidates, RankingKey key) {
    std::stable_sort(candidates.begin(), candidates.end(), [key](const LesionCandidate& a, const LesionCandidate& b) {
        const double ka = key == RankingKey::peak ? a.peak_confidence : a.mean_confidence;
        const double kb = key == RankingKey::peak ? b.peak_confidence : b.mean_confidence;
        if (ka != kb) return ka > kb;
        if (a.size() != b.size()) return a.size() > b.size();
        return a.peak_index < b.peak_index;
    });
    return candidates;
}

std::vector<LesionCandidate> report_mask(const std::vector<LesionCandidate>& candidates, int n_sig, RankingKey key) {
    if (n_sig < 0) throw ValidationError("n_sig must be non-negative");
    auto ranked = rank_for_annotation(candidates, key);
    ranked.resize(std::min(ranked.size(), static_cast<std::size_t>(n_sig)));
    return ranked;
}

AnnotationOutcome report_guided_annotation(const std::vector<LesionCandidate>& candidates, int n_sig, const Dims& dims,
                                           const Spacing& spacing, RankingKey key) {
    if (n_sig < 0) throw ValidationError("n_sig must be non-negative");
    AnnotationOutcome out;
    out.n_sig = n_sig;
    out.candidate_count = static_cast<int>(candidates.size());

    if (n_sig == 0) {
        out.status = AnnotationStatus::negative;
        out.mask = LabelVolume::empty(dims, spacing);
        return out;
    }
    if (static_cast<int>(candidates.size()) < n_sig) {
        out.status = AnnotationStatus::excluded;
        out.reason = "insufficient-candidates";
        return out;
    }

    out.status = AnnotationStatus::annotated;
    out.kept = report_mask(candidates, n_sig, key);
    LabelVolume mask = LabelVolume::empty(dims, spacing);
    for (std::size_t k = 0; k < out.kept.size(); ++k)
        for (auto i : out.kept[k].voxels) {
            auto& label = mask.data[static_cast<std::size_t>(i)];
            if (label != 0) throw ValidationError("kept candidates overlap; cannot rasterise a label mask");
            label = static_cast<std::int32_t>(k + 1);
        }
    out.mask = std::move(mask);
    return out;
}

AnnotationOutcome annotate_volumes(const std::string& case_id, std::span<const Volume> maps,
                                   const std::optional<std::string>& report_text, std::optional<int> n_sig_override,
                                   const AnnotateConfig& cfg) {
    const Volume conf = ensemble_average(maps);
    const auto candidates = extract_candidates(conf, cfg.method, cfg.extraction, cfg.static_threshold);

    int n_sig = 0;
    if (n_sig_override) {
        n_sig = *n_sig_override;
    } else {
        const auto extraction = report_text ? extract(Report{case_id, *report_text}, cfg.language) : ReportExtraction{};
        if (extraction.status == ExtractionStatus::empty) {
            AnnotationOutcome out;
            out.case_id = case_id;
            out.status = AnnotationStatus::excluded;
            out.reason = "empty-report";
            out.candidate_count = static_cast<int>(candidates.size());
            return out;
        }
        n_sig = extraction.n_sig;
    }

    auto out = report_guided_annotation(candidates, n_sig, conf.dims, conf.spacing, cfg.extraction.ranking);
    out.case_id = case_id;
    return out;
}

AnnotationOutcome annotate_case(const CaseRecord& record, const AnnotateConfig& cfg) {
    if (record.volume_paths.empty()) throw ValidationError("case " + record.case_id + " lists no confidence volumes");
    std::vector<Volume> maps;
    maps.reserve(record.volume_paths.size());
    for (const auto& p : record.volume_paths) maps.push_back(read_volume(p));
    return annotate_volumes(record.case_id, maps, record.report_text, record.n_sig_override, cfg);
}

} // namespace lesann
