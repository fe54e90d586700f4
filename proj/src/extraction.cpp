#include "lesann/extraction.hpp"

#include "lesann/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lesann {

void ExtractionConfig::validate() const {
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) throw ValidationError("rel_threshold must lie in (0, 1)");
    if (max_lesions < 1) throw ValidationError("max_lesions must be positive");
    if (min_voxels < 0) throw ValidationError("min_voxels must be non-negative");
    if (!(min_peak >= 0.0 && min_peak < 1.0)) throw ValidationError("min_peak must lie in [0, 1)");
    connectivity_from_int(static_cast<int>(connectivity));
}

ExtractionMethod extraction_method_from_string(const std::string& name) {
    if (name == "dynamic") return ExtractionMethod::dynamic;
    if (name == "dynamic-fast") return ExtractionMethod::dynamic_fast;
    if (name == "static") return ExtractionMethod::static_threshold;
    if (name == "otsu") return ExtractionMethod::otsu;
    throw ValidationError("unknown extraction method '" + name + "'");
}

const char* to_string(ExtractionMethod m) {
    switch (m) {
    case ExtractionMethod::dynamic: return "dynamic";
    case ExtractionMethod::dynamic_fast: return "dynamic-fast";
    case ExtractionMethod::static_threshold: return "static";
    case ExtractionMethod::otsu: return "otsu";
    }
    return "unknown";
}

double discard_volume_bound_cm3(const ExtractionConfig& cfg, const Spacing& spacing) {
    return static_cast<double>(cfg.min_voxels) * voxel_volume_cm3(spacing);
}

std::int64_t argmax_lowest(std::span<const float> values) {
    std::int64_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<std::int64_t>(i);
    return best;
}

namespace {

void sort_candidates(std::vector<LesionCandidate>& out, RankingKey key) {
    std::stable_sort(out.begin(), out.end(), [key](const LesionCandidate& a, const LesionCandidate& b) {
        const double ka = key == RankingKey::peak ? a.peak_confidence : a.mean_confidence;
        const double kb = key == RankingKey::peak ? b.peak_confidence : b.mean_confidence;
        if (ka != kb) return ka > kb;
        return a.peak_index < b.peak_index;
    });
}

LesionCandidate make_candidate(std::vector<std::int64_t> voxels, const Volume& conf) {
    std::sort(voxels.begin(), voxels.end());
    LesionCandidate c;
    c.peak_index = voxels.front();
    double sum = 0.0;
    for (auto i : voxels) {
        const float v = conf[i];
        sum += v;
        if (v > conf[c.peak_index]) c.peak_index = i;
    }
    c.peak_confidence = conf[c.peak_index];
    c.mean_confidence = sum / static_cast<double>(voxels.size());
    c.volume_cm3 = static_cast<double>(voxels.size()) * voxel_volume_cm3(conf.spacing);
    c.voxels = std::move(voxels);
    return c;
}

// Voxels connected to `seed` whose value is at least `threshold`.
std::vector<std::int64_t> grow_region(std::span<const float> values, const Dims& dims, std::int64_t seed,
                                      double threshold, Connectivity connectivity, std::vector<std::uint8_t>& visited) {
    const auto offsets = neighbour_offsets(connectivity);
    std::vector<std::int64_t> region{seed};
    visited[static_cast<std::size_t>(seed)] = 1;
    for (std::size_t head = 0; head < region.size(); ++head) {
        const auto [x, y, z] = dims.coords(region[head]);
        for (const auto& o : offsets) {
            const std::int64_t nx = x + o[0], ny = y + o[1], nz = z + o[2];
            if (!dims.contains(nx, ny, nz)) continue;
            const std::int64_t j = dims.index(nx, ny, nz);
            const auto k = static_cast<std::size_t>(j);
            if (!visited[k] && static_cast<double>(values[k]) >= threshold) {
                visited[k] = 1;
                region.push_back(j);
            }
        }
    }
    for (auto i : region) visited[static_cast<std::size_t>(i)] = 0;
    return region;
}

std::vector<LesionCandidate> islands(const Volume& conf, double threshold, const ExtractionConfig& cfg) {
    std::vector<std::uint8_t> mask(conf.data.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = static_cast<double>(conf.data[i]) >= threshold;

    std::vector<LesionCandidate> out;
    for (auto& comp : component_voxels(mask, conf.dims, cfg.connectivity))
        if (static_cast<std::int64_t>(comp.size()) > cfg.min_voxels) out.push_back(make_candidate(std::move(comp), conf));
    sort_candidates(out, cfg.ranking);
    return out;
}

} // namespace

std::vector<LesionCandidate> extract_dynamic(const Volume& conf, const ExtractionConfig& cfg) {
    cfg.validate();
    conf.validate_confidence();

    std::vector<float> work = conf.data;
    std::vector<std::uint8_t> visited(work.size(), 0);
    std::vector<LesionCandidate> out;

    while (static_cast<int>(out.size()) < cfg.max_lesions) {
        const std::int64_t peak = argmax_lowest(work);
        const double peak_value = work[static_cast<std::size_t>(peak)];
        if (peak_value <= 0.0 || peak_value < cfg.min_peak) break;

        auto region = grow_region(work, conf.dims, peak, cfg.rel_threshold * peak_value, cfg.connectivity, visited);
        for (auto i : region) work[static_cast<std::size_t>(i)] = 0.0f;

        // Tiny blobs are removed from the map but do not use up a lesion slot.
        if (static_cast<std::int64_t>(region.size()) > cfg.min_voxels)
            out.push_back(make_candidate(std::move(region), conf));
    }
    if (cfg.ranking == RankingKey::mean) sort_candidates(out, RankingKey::mean);
    return out;
}

std::vector<LesionCandidate> extract_static(const Volume& conf, double threshold, const ExtractionConfig& cfg) {
    cfg.validate();
    conf.validate_confidence();
    if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("static threshold must lie in (0, 1)");
    return islands(conf, threshold, cfg);
}

std::vector<LesionCandidate> extract_dynamic_fast(const Volume& conf, const ExtractionConfig& cfg) {
    cfg.validate();
    conf.validate_confidence();
    const double global_max = conf[argmax_lowest(conf.data)];
    if (global_max <= 0.0 || global_max < cfg.min_peak) return {};
    return islands(conf, cfg.rel_threshold * global_max, cfg);
}

double otsu_threshold(const Volume& conf) {
    conf.validate_confidence();
    constexpr int kBins = 256;
    std::array<std::int64_t, kBins> hist{};
    for (float v : conf.data) ++hist[static_cast<std::size_t>(std::min(kBins - 1, static_cast<int>(v * kBins)))];

    const auto total = static_cast<double>(conf.data.size());
    double weighted_total = 0.0;
    for (int b = 0; b < kBins; ++b) weighted_total += hist[static_cast<std::size_t>(b)] * (b + 0.5) / kBins;

    // Split k puts bins [0, k) in the lower class.
    double best = 0.0;
    int best_k = -1;
    double n0 = 0.0, sum0 = 0.0;
    for (int k = 1; k < kBins; ++k) {
        n0 += static_cast<double>(hist[static_cast<std::size_t>(k - 1)]);
        sum0 += hist[static_cast<std::size_t>(k - 1)] * (k - 0.5) / kBins;
        const double n1 = total - n0;
        if (n0 == 0.0 || n1 == 0.0) continue;
        const double mu0 = sum0 / n0;
        const double mu1 = (weighted_total - sum0) / n1;
        const double between = (n0 / total) * (n1 / total) * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            best_k = k;
        }
    }
    if (best_k < 0) throw ValidationError("Otsu threshold undefined: volume histogram occupies a single bin");
    return static_cast<double>(best_k) / kBins;
}

std::vector<LesionCandidate> extract_otsu(const Volume& conf, const ExtractionConfig& cfg) {
    return extract_static(conf, otsu_threshold(conf), cfg);
}

std::vector<LesionCandidate> extract_candidates(const Volume& conf, ExtractionMethod method,
                                                const ExtractionConfig& cfg, double static_threshold) {
    switch (method) {
    case ExtractionMethod::dynamic: return extract_dynamic(conf, cfg);
    case ExtractionMethod::dynamic_fast: return extract_dynamic_fast(conf, cfg);
    case ExtractionMethod::static_threshold: return extract_static(conf, static_threshold, cfg);
    case ExtractionMethod::otsu: return extract_otsu(conf, cfg);
    }
    throw ValidationError("unknown extraction method");
}

} // namespace lesann
