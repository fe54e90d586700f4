#pragma once

#include "lesann/reports.hpp"
#include "lesann/volume.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lesann {

struct PlantedLesion {
    std::array<std::int64_t, 3> center{}; // voxel coordinates
    std::array<double, 3> sigma_mm{1.0, 1.0, 1.0};
    double amplitude = 1.0;
};

struct PhantomSpec {
    Dims dims;
    Spacing spacing;
    std::vector<PlantedLesion> lesions;
    double background_level = 0.0;
    std::uint64_t seed = 0;
    // Lesions below this amplitude are rendered into the confidence map but
    // left out of the ground truth.
    double gt_min_amplitude = 0.0;

    void validate() const;
};

// Confidence = clamp(background + sum of anisotropic Gaussian bumps, 0, 1).
// Ground truth labels the 1-sigma ellipsoid of each lesion at or above
// gt_min_amplitude, in lesion order; contested voxels go to the nearer lesion.
std::pair<Volume, LabelVolume> generate_phantom(const PhantomSpec& spec);

// Squared Mahalanobis distance of a voxel from a lesion centre.
double mahalanobis2(const PlantedLesion& lesion, const Spacing& spacing, std::int64_t x, std::int64_t y, std::int64_t z);

// out = sqrt((v + sigma*n1)^2 + (sigma*n2)^2), independent normal draws per voxel.
Volume rician_noise(const Volume& v, double sigma, std::uint64_t seed);

struct SyntheticFinding {
    int pirads = 2;
    int t2w = 2;
    int dwi = 2;
    DceSign dce = DceSign::negative;
};

enum class ReportVariant { sectioned, joint, grouped, unparseable };

ReportVariant report_variant_from_string(const std::string& name);
const char* to_string(ReportVariant v);

// Report text following the lesion-section grammar. With no findings the
// report describes a single PI-RADS 2 area. The grouped variant merges the
// first adjacent pair of equally significant findings under "afwijking i+j";
// the unparseable variant carries no scores at all.
Report generate_report(const std::vector<SyntheticFinding>& findings, ReportVariant variant, std::uint64_t seed);

// n_sig that generate_report encodes for these findings.
int planted_n_sig(const std::vector<SyntheticFinding>& findings);

struct CaseScenario {
    Dims dims{64, 64, 24};
    Spacing spacing{0.5, 0.5, 3.6};
    int max_significant = 3;
    int max_fp_blobs = 2;
    double negative_fraction = 0.2;
    double significant_amplitude_min = 0.6;
    double significant_amplitude_max = 1.0;
    double fp_amplitude_min = 0.15;
    double fp_amplitude_max = 0.45;
    std::array<double, 2> sigma_xy_mm{1.5, 2.5};
    std::array<double, 2> sigma_z_mm{3.6, 5.4};
    double background_level = 0.02;
    int ensemble_members = 3;
    double noise_sigma = 0.01;
    double report_fp_probability = 0.5; // chance an FP blob is reported as PI-RADS 2-3
    std::vector<ReportVariant> variants{ReportVariant::sectioned, ReportVariant::joint, ReportVariant::grouped};
    double unparseable_fraction = 0.0;
    double min_separation = 6.0; // in units of the larger per-axis sigma

    void validate() const;
};

struct SyntheticCase {
    std::string case_id;
    std::vector<Volume> members; // noisy ensemble members
    Volume confidence;           // noise-free phantom
    LabelVolume gt;              // significant lesions only
    Report report;
    int true_n_sig = 0;
    std::vector<PlantedLesion> lesions;
    int significant_lesions = 0;
    ReportVariant variant = ReportVariant::sectioned;
};

SyntheticCase generate_case(const CaseScenario& scenario, std::uint64_t seed, int case_index);

} // namespace lesann
