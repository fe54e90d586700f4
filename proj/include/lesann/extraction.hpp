#pragma once

#include "lesann/volume.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lesann {

struct LesionCandidate {
    std::vector<std::int64_t> voxels; // sorted linear indices
    std::int64_t peak_index = 0;
    double peak_confidence = 0.0;
    double mean_confidence = 0.0;
    double volume_cm3 = 0.0;

    std::size_t size() const { return voxels.size(); }

    friend bool operator==(const LesionCandidate&, const LesionCandidate&) = default;
};

enum class RankingKey { peak, mean };

struct ExtractionConfig {
    double rel_threshold = 0.40; // fraction of each peak's confidence the blob grows down to
    int max_lesions = 5;
    int min_voxels = 10;         // candidates with this many voxels or fewer are discarded
    double min_peak = 0.10;      // iteration stops once the remaining maximum drops below this
    Connectivity connectivity = Connectivity::twentysix;
    RankingKey ranking = RankingKey::peak;

    void validate() const;
};

enum class ExtractionMethod { dynamic, dynamic_fast, static_threshold, otsu };

ExtractionMethod extraction_method_from_string(const std::string& name);
const char* to_string(ExtractionMethod m);

// Iterative peak-relative blob extraction. Output is ordered by descending
// peak confidence (or mean confidence when cfg.ranking == mean).
std::vector<LesionCandidate> extract_dynamic(const Volume& conf, const ExtractionConfig& cfg = {});

// Islands above a fixed threshold, one candidate per component.
std::vector<LesionCandidate> extract_static(const Volume& conf, double threshold, const ExtractionConfig& cfg = {});

// Islands above rel_threshold * global maximum.
std::vector<LesionCandidate> extract_dynamic_fast(const Volume& conf, const ExtractionConfig& cfg = {});

// Threshold maximising between-class variance over a 256-bin histogram on [0, 1].
double otsu_threshold(const Volume& conf);

std::vector<LesionCandidate> extract_otsu(const Volume& conf, const ExtractionConfig& cfg = {});

// Dispatch on method; `static_threshold` is only used by the static method.
std::vector<LesionCandidate> extract_candidates(const Volume& conf, ExtractionMethod method,
                                                const ExtractionConfig& cfg, double static_threshold = 0.5);

// Largest volume a discarded candidate can have: min_voxels voxels.
double discard_volume_bound_cm3(const ExtractionConfig& cfg, const Spacing& spacing);

// Lowest linear index among the maximal values.
std::int64_t argmax_lowest(std::span<const float> values);

} // namespace lesann
