#include "lesann/synthetic.hpp"

#include "lesann/error.hpp"
#include "lesann/kernels.hpp"
#include "lesann/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lesann {

void PhantomSpec::validate() const {
    validate_geometry(dims, spacing);
    if (!(background_level >= 0.0 && background_level <= 0.05)) throw ValidationError("background level must lie in [0, 0.05]");
    for (const auto& l : lesions) {
        if (!dims.contains(l.center[0], l.center[1], l.center[2])) throw ValidationError("lesion centre outside the grid");
        if (!(l.amplitude > 0.0 && l.amplitude <= 1.0)) throw ValidationError("lesion amplitude must lie in (0, 1]");
        if (!(l.amplitude > background_level)) throw ValidationError("lesion amplitude must exceed the background level");
        for (double s : l.sigma_mm)
            if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("lesion sigma must be positive");
    }
}

double mahalanobis2(const PlantedLesion& lesion, const Spacing& spacing, std::int64_t x, std::int64_t y, std::int64_t z) {
    const double dx = static_cast<double>(x - lesion.center[0]) * spacing.sx / lesion.sigma_mm[0];
    const double dy = static_cast<double>(y - lesion.center[1]) * spacing.sy / lesion.sigma_mm[1];
    const double dz = static_cast<double>(z - lesion.center[2]) * spacing.sz / lesion.sigma_mm[2];
    return dx * dx + dy * dy + dz * dz;
}

std::pair<Volume, LabelVolume> generate_phantom(const PhantomSpec& spec) {
    spec.validate();
    Volume conf = Volume::filled(spec.dims, spec.spacing);
    LabelVolume gt = LabelVolume::empty(spec.dims, spec.spacing);

    std::vector<int> gt_label(spec.lesions.size(), 0);
    int next = 0;
    for (std::size_t k = 0; k < spec.lesions.size(); ++k)
        if (spec.lesions[k].amplitude >= spec.gt_min_amplitude) gt_label[k] = ++next;

    const Dims& d = spec.dims;
    for (std::int64_t z = 0; z < d.nz; ++z)
        for (std::int64_t y = 0; y < d.ny; ++y)
            for (std::int64_t x = 0; x < d.nx; ++x) {
                double value = spec.background_level;
                double nearest = std::numeric_limits<double>::infinity();
                int label = 0;
                for (std::size_t k = 0; k < spec.lesions.size(); ++k) {
                    const double r2 = mahalanobis2(spec.lesions[k], spec.spacing, x, y, z);
                    value += spec.lesions[k].amplitude * std::exp(-0.5 * r2);
                    if (gt_label[k] && r2 <= 1.0 && r2 < nearest) {
                        nearest = r2;
                        label = gt_label[k];
                    }
                }
                const auto i = static_cast<std::size_t>(d.index(x, y, z));
                conf.data[i] = static_cast<float>(std::clamp(value, 0.0, 1.0));
                gt.data[i] = label;
            }

    // A lesion fully shadowed by a nearer one would leave a gap in 1..K.
    std::vector<std::int32_t> remap(static_cast<std::size_t>(next) + 1, 0);
    for (auto l : gt.data)
        if (l > 0) remap[static_cast<std::size_t>(l)] = 1;
    std::int32_t compact = 0;
    for (std::size_t l = 1; l < remap.size(); ++l)
        if (remap[l]) remap[l] = ++compact;
    for (auto& l : gt.data) l = remap[static_cast<std::size_t>(l)];
    return {std::move(conf), std::move(gt)};
}

Volume rician_noise(const Volume& v, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw ValidationError("Rician sigma must be non-negative");
    v.validate();
    Volume out = Volume::filled(v.dims, v.spacing);
    kernels::omp::rician_noise(v.data, sigma, seed, out.data);
    return out;
}

ReportVariant report_variant_from_string(const std::string& name) {
    if (name == "sectioned") return ReportVariant::sectioned;
    if (name == "joint") return ReportVariant::joint;
    if (name == "grouped") return ReportVariant::grouped;
    if (name == "unparseable") return ReportVariant::unparseable;
    throw ValidationError("unknown report variant '" + name + "'");
}

const char* to_string(ReportVariant v) {
    switch (v) {
    case ReportVariant::sectioned: return "sectioned";
    case ReportVariant::joint: return "joint";
    case ReportVariant::grouped: return "grouped";
    case ReportVariant::unparseable: return "unparseable";
    }
    return "unknown";
}

int planted_n_sig(const std::vector<SyntheticFinding>& findings) {
    return static_cast<int>(std::count_if(findings.begin(), findings.end(), [](const auto& f) { return f.pirads >= 4; }));
}

namespace {

constexpr const char* kZones[] = {
    "peripheral zone right apex",
    "peripheral zone right posterior mid-base prostate",
    "peripheral zone left posterolateral mid",
    "transition zone left anterior",
    "transition zone right mid-gland",
    "central zone base",
    "anterior fibromuscular stroma",
};

constexpr const char* kZonesDutch[] = {
    "perifere zone rechts apicaal",
    "perifere zone links dorsaal midden",
    "transitiezone links anterieur",
    "transitiezone rechts midden",
    "centrale zone basaal",
};

const char* sign(DceSign s) { return s == DceSign::positive ? "+" : "-"; }

const char* risk_category(int pirads) {
    if (pirads >= 4) return "intermediate/high-grade cancer";
    if (pirads == 3) return "intermediate";
    return "low";
}

const char* assessment(int pirads) {
    if (pirads >= 4) return "significant prostate cancer";
    if (pirads == 3) return "an equivocal abnormality";
    return "benign changes";
}

std::string format(const char* fmt, auto... args) {
    const int n = std::snprintf(nullptr, 0, fmt, args...);
    std::string out(static_cast<std::size_t>(n), '\0');
    std::snprintf(out.data(), out.size() + 1, fmt, args...);
    return out;
}

std::string section_text(const std::string& ids, const SyntheticFinding& f, StreamRng& rng) {
    const int adc = 500 + static_cast<int>(rng.below(500));
    switch (rng.below(4)) {
    case 0:
        return format("Index lesion mark%s: %s. T2W/DWI/DCE score: %d/%d/%s. Minimal ADC value: %d (normally at least "
                      "950). Risk category: %s (PI-RADS v2 category: %d).\n",
                      ids.c_str(), kZones[rng.below(std::size(kZones))], f.t2w, f.dwi, sign(f.dce), adc,
                      risk_category(f.pirads), f.pirads);
    case 1:
        return format("Finding nr. %s: %s. Score T2W: %d, Score DCE: %s, Score DWI: %d, minimal ADC value %d. Lesion "
                      "best fits %s (PIRADS %d).\n",
                      ids.c_str(), kZones[rng.below(std::size(kZones))], f.t2w, sign(f.dce), f.dwi, adc,
                      assessment(f.pirads), f.pirads);
    case 2:
        return format("Afwijking nummer %s: %s. T2W/DWI/DCE score: %d/%d/%s. ADC minimaal %d. PI-RADS: %d.\n",
                      ids.c_str(), kZonesDutch[rng.below(std::size(kZonesDutch))], f.t2w, f.dwi, sign(f.dce), adc,
                      f.pirads);
    default:
        return format("Laesie %s: %s. T2W score %d, DWI score %d, DCE %s. Conclusie PI-RADS %d.\n", ids.c_str(),
                      kZonesDutch[rng.below(std::size(kZonesDutch))], f.t2w, f.dwi, sign(f.dce), f.pirads);
    }
}

std::string preamble(StreamRng& rng) {
    const int psa = 3 + static_cast<int>(rng.below(20));
    const int volume = 25 + static_cast<int>(rng.below(60));
    return format("Clinical information: elevated PSA (%d ng/ml). Biparametric MRI of the prostate.\n"
                  "Prostate volume approximately %d cc. No extraprostatic extension.\n",
                  psa, volume);
}

} // namespace

Report generate_report(const std::vector<SyntheticFinding>& input, ReportVariant variant, std::uint64_t seed) {
    StreamRng rng(seed, 0);
    std::vector<SyntheticFinding> findings = input;
    for (const auto& f : findings)
        if (f.pirads < 1 || f.pirads > 5 || f.t2w < 1 || f.t2w > 5 || f.dwi < 1 || f.dwi > 5)
            throw ValidationError("synthetic finding scores must lie in 1..5");
    if (findings.empty()) findings.push_back({2, 2, 2, DceSign::negative});

    std::string body = preamble(rng);
    switch (variant) {
    case ReportVariant::unparseable:
        body += "Findings: a suspicious area is described in the peripheral zone, comparable to the prior study.\n"
                "Please refer to the addendum for the final assessment.\n";
        break;
    case ReportVariant::joint:
        for (const auto& f : findings) {
            body += format("In the %s there is an area with T2W/DWI/DCE score %d/%d/%s, overall PI-RADS %d.\n",
                           kZones[rng.below(std::size(kZones))], f.t2w, f.dwi, sign(f.dce), f.pirads);
        }
        break;
    case ReportVariant::sectioned:
    case ReportVariant::grouped: {
        std::size_t merge_at = findings.size();
        if (variant == ReportVariant::grouped)
            for (std::size_t i = 0; i + 1 < findings.size(); ++i)
                if ((findings[i].pirads >= 4) == (findings[i + 1].pirads >= 4)) {
                    merge_at = i;
                    break;
                }
        int id = 1;
        for (std::size_t i = 0; i < findings.size(); ++i) {
            if (i == merge_at) {
                body += format("Afwijking %d+%d: %s. T2W/DWI/DCE score: %d/%d/%s. PI-RADS v2 category: %d.\n", id,
                               id + 1, kZonesDutch[rng.below(std::size(kZonesDutch))], findings[i].t2w,
                               findings[i].dwi, sign(findings[i].dce), std::max(findings[i].pirads, findings[i + 1].pirads));
                id += 2;
                ++i;
                continue;
            }
            body += section_text(std::to_string(id++), findings[i], rng);
        }
        break;
    }
    }
    body += "Conclusion: see the findings described above.\n";
    return Report{"", body};
}

void CaseScenario::validate() const {
    validate_geometry(dims, spacing);
    if (max_significant < 0 || max_fp_blobs < 0) throw ValidationError("lesion counts must be non-negative");
    if (!(significant_amplitude_min > fp_amplitude_max))
        throw ValidationError("significant lesions must be brighter than false-positive blobs");
    if (!(significant_amplitude_min <= significant_amplitude_max && significant_amplitude_max <= 1.0))
        throw ValidationError("invalid significant amplitude range");
    if (!(fp_amplitude_min > background_level && fp_amplitude_min <= fp_amplitude_max))
        throw ValidationError("invalid false-positive amplitude range");
    if (ensemble_members < 1) throw ValidationError("need at least one ensemble member");
    if (!(noise_sigma >= 0.0)) throw ValidationError("noise sigma must be non-negative");
    if (variants.empty()) throw ValidationError("need at least one report variant");
    if (sigma_xy_mm[0] <= 0 || sigma_xy_mm[1] < sigma_xy_mm[0] || sigma_z_mm[0] <= 0 || sigma_z_mm[1] < sigma_z_mm[0])
        throw ValidationError("invalid sigma range");
}

SyntheticCase generate_case(const CaseScenario& sc, std::uint64_t seed, int case_index) {
    sc.validate();
    StreamRng rng(seed, static_cast<std::uint64_t>(case_index));
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };

    SyntheticCase out;
    out.case_id = format("case%04d", case_index);

    const bool negative = rng.uniform() < sc.negative_fraction || sc.max_significant == 0;
    const int n_significant = negative ? 0 : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(sc.max_significant)));
    const int n_fp = static_cast<int>(rng.below(static_cast<std::uint64_t>(sc.max_fp_blobs) + 1));

    auto separated = [&](const PlantedLesion& a) {
        for (const auto& b : out.lesions) {
            const double dx = static_cast<double>(a.center[0] - b.center[0]) * sc.spacing.sx / std::max(a.sigma_mm[0], b.sigma_mm[0]);
            const double dy = static_cast<double>(a.center[1] - b.center[1]) * sc.spacing.sy / std::max(a.sigma_mm[1], b.sigma_mm[1]);
            const double dz = static_cast<double>(a.center[2] - b.center[2]) * sc.spacing.sz / std::max(a.sigma_mm[2], b.sigma_mm[2]);
            if (std::sqrt(dx * dx + dy * dy + dz * dz) < sc.min_separation) return false;
        }
        return true;
    };

    for (int k = 0; k < n_significant + n_fp; ++k) {
        const bool significant = k < n_significant;
        for (int attempt = 0; attempt < 200; ++attempt) {
            PlantedLesion l;
            l.sigma_mm = {uniform(sc.sigma_xy_mm[0], sc.sigma_xy_mm[1]), uniform(sc.sigma_xy_mm[0], sc.sigma_xy_mm[1]),
                          uniform(sc.sigma_z_mm[0], sc.sigma_z_mm[1])};
            l.amplitude = significant ? uniform(sc.significant_amplitude_min, sc.significant_amplitude_max)
                                      : uniform(sc.fp_amplitude_min, sc.fp_amplitude_max);
            const std::array<double, 3> spacing{sc.spacing.sx, sc.spacing.sy, sc.spacing.sz};
            const std::array<std::int64_t, 3> extent{sc.dims.nx, sc.dims.ny, sc.dims.nz};
            bool fits = true;
            for (int a = 0; a < 3; ++a) {
                const auto margin = static_cast<std::int64_t>(std::ceil(2.0 * l.sigma_mm[a] / spacing[a]));
                if (extent[a] <= 2 * margin) {
                    fits = false;
                    break;
                }
                l.center[a] = margin + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(extent[a] - 2 * margin)));
            }
            if (fits && separated(l)) {
                out.lesions.push_back(l);
                out.significant_lesions += significant;
                break;
            }
        }
    }

    PhantomSpec spec{sc.dims, sc.spacing, out.lesions, sc.background_level, seed, sc.significant_amplitude_min};
    auto [conf, gt] = generate_phantom(spec);
    out.confidence = std::move(conf);
    out.gt = std::move(gt);

    for (int m = 0; m < sc.ensemble_members; ++m) {
        const std::uint64_t member_seed = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(case_index) * 1024 + m));
        Volume noisy = sc.noise_sigma > 0.0 ? rician_noise(out.confidence, sc.noise_sigma, member_seed) : out.confidence;
        for (auto& v : noisy.data) v = std::clamp(v, 0.0f, 1.0f);
        out.members.push_back(std::move(noisy));
    }

    std::vector<SyntheticFinding> findings;
    for (const auto& l : out.lesions) {
        if (l.amplitude >= sc.significant_amplitude_min) {
            const int p = 4 + static_cast<int>(rng.below(2));
            findings.push_back({p, p, p, DceSign::positive});
        } else if (rng.uniform() < sc.report_fp_probability) {
            const int p = 2 + static_cast<int>(rng.below(2));
            findings.push_back({p, p, p - 1, DceSign::negative});
        }
    }
    for (std::size_t i = findings.size(); i > 1; --i) std::swap(findings[i - 1], findings[rng.below(i)]);

    out.variant = rng.uniform() < sc.unparseable_fraction ? ReportVariant::unparseable
                                                          : sc.variants[rng.below(sc.variants.size())];
    out.report = generate_report(findings, out.variant, splitmix64(seed + static_cast<std::uint64_t>(case_index)));
    out.report.case_id = out.case_id;
    out.true_n_sig = planted_n_sig(findings);
    return out;
}

} // namespace lesann
