#pragma once

#include "lesann/extraction.hpp"
#include "lesann/reports.hpp"
#include "lesann/volume.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lesann {

enum class AnnotationStatus { annotated, excluded, negative };

const char* to_string(AnnotationStatus s);

struct AnnotationOutcome {
    std::string case_id;
    AnnotationStatus status = AnnotationStatus::excluded;
    std::string reason; // set for excluded cases: "empty-report" or "insufficient-candidates"
    std::optional<LabelVolume> mask;
    std::vector<LesionCandidate> kept;
    int n_sig = 0;
    int candidate_count = 0;
};

// One case as listed in a manifest. Paths are resolved by the caller.
struct CaseRecord {
    std::string case_id;
    std::vector<std::filesystem::path> volume_paths;
    std::optional<std::string> report_text;
    std::optional<std::filesystem::path> gt_path;
    std::optional<int> n_sig_override;
};

struct AnnotateConfig {
    ExtractionConfig extraction;
    ExtractionMethod method = ExtractionMethod::dynamic;
    double static_threshold = 0.5;
    LanguageProfile language = LanguageProfile::both;
};

Volume ensemble_average(std::span<const Volume> maps);

// Candidates reordered by (ranking key desc, size desc, peak index asc), the
// order used to pick the n_sig most confident ones.
std::vector<LesionCandidate> rank_for_annotation(std::vector<LesionCandidate> candidates, RankingKey key = RankingKey::peak);

// Top-min(n_sig, count) candidates in annotation rank order.
std::vector<LesionCandidate> report_mask(const std::vector<LesionCandidate>& candidates, int n_sig,
                                         RankingKey key = RankingKey::peak);

AnnotationOutcome report_guided_annotation(const std::vector<LesionCandidate>& candidates, int n_sig, const Dims& dims,
                                           const Spacing& spacing, RankingKey key = RankingKey::peak);

// In-memory pipeline: ensemble -> extraction -> report counting -> annotation.
AnnotationOutcome annotate_volumes(const std::string& case_id, std::span<const Volume> maps,
                                   const std::optional<std::string>& report_text, std::optional<int> n_sig_override,
                                   const AnnotateConfig& cfg);

AnnotationOutcome annotate_case(const CaseRecord& record, const AnnotateConfig& cfg);

} // namespace lesann
