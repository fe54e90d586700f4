#include "lesann/error.hpp"
#include "lesann/random.hpp"
#include "lesann/extraction.hpp"
#include "lesann/reports.hpp"
#include "lesann/synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lesann;

TEST_SUITE("synthetic") {

TEST_CASE("no lesions gives a constant background and empty ground truth") {
    PhantomSpec spec;
    spec.dims = {8, 8, 4};
    spec.background_level = 0.03;
    const auto [conf, gt] = generate_phantom(spec);
    for (float v : conf.data) CHECK(v == 0.03f);
    CHECK(gt.num_labels() == 0);
}

TEST_CASE("one centred lesion peaks at the centre") {
    PhantomSpec spec;
    spec.dims = {21, 21, 9};
    spec.spacing = {0.5, 0.5, 3.6};
    spec.lesions = {{{10, 10, 4}, {2, 2, 5}, 1.0}};
    const auto [conf, gt] = generate_phantom(spec);
    CHECK(argmax_lowest(conf.data) == conf.dims.index(10, 10, 4));
    CHECK(conf.at(10, 10, 4) == 1.0f);
    CHECK(gt.num_labels() == 1);
    // 1-sigma ellipsoid: 2 mm = 4 voxels in-plane.
    CHECK(gt.data[static_cast<std::size_t>(conf.dims.index(14, 10, 4))] == 1);
    CHECK(gt.data[static_cast<std::size_t>(conf.dims.index(15, 10, 4))] == 0);
}

TEST_CASE("phantoms are reproducible") {
    PhantomSpec spec;
    spec.dims = {16, 16, 6};
    spec.lesions = {{{4, 4, 2}, {1.5, 2, 3}, 0.7}, {{12, 11, 3}, {2, 1, 2}, 0.5}};
    spec.background_level = 0.01;
    CHECK(generate_phantom(spec) == generate_phantom(spec));
}

TEST_CASE("invalid specs") {
    PhantomSpec spec;
    spec.dims = {8, 8, 8};
    spec.lesions = {{{9, 0, 0}, {1, 1, 1}, 0.5}};
    CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
    spec.lesions = {{{1, 1, 1}, {1, 1, 1}, 1.5}};
    CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
    spec.lesions = {{{1, 1, 1}, {1, 1, 1}, 0.02}};
    spec.background_level = 0.04;
    CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
    spec.lesions.clear();
    spec.background_level = 0.2;
    CHECK_THROWS_AS(generate_phantom(spec), ValidationError);
}

TEST_CASE("three-lesion phantom: the top three candidates sit in the three lesions") {
    PhantomSpec spec;
    spec.dims = {64, 64, 24};
    spec.spacing = {0.5, 0.5, 3.6};
    spec.lesions = {{{12, 12, 5}, {2, 2, 4}, 0.9}, {{50, 14, 12}, {2, 2, 4}, 0.8}, {{30, 50, 19}, {2, 2, 4}, 0.7}};
    const auto [conf, gt] = generate_phantom(spec);
    const auto c = extract_dynamic(conf);
    REQUIRE(c.size() >= 3);
    for (int k = 0; k < 3; ++k) CHECK(gt.data[static_cast<std::size_t>(c[static_cast<std::size_t>(k)].peak_index)] == k + 1);
}

TEST_CASE("Rician noise") {
    auto zero = Volume::filled({100, 100, 100}, {1, 1, 1});
    const auto rayleigh = rician_noise(zero, 1.0, 5);
    double mean = 0;
    for (float v : rayleigh.data) {
        CHECK(v >= 0.0f);
        mean += v;
    }
    mean /= static_cast<double>(rayleigh.data.size());
    CHECK(std::abs(mean - std::sqrt(std::numbers::pi / 2)) < 0.01);

    auto bright = Volume::filled({100, 100, 10}, {1, 1, 1}, 0.8f);
    const auto g = rician_noise(bright, 0.01, 6);
    double m = 0;
    for (float v : g.data) m += v;
    m /= static_cast<double>(g.data.size());
    CHECK(std::abs(m - 0.8) < 3 * 0.01 / std::sqrt(static_cast<double>(g.data.size())) + 1e-4);

    const auto same = rician_noise(bright, 0.0, 1);
    CHECK(same == bright);
    CHECK(rician_noise(bright, 0.01, 6) == g);
    CHECK_THROWS_AS(rician_noise(bright, -1.0, 1), ValidationError);
}

TEST_CASE("report round trips") {
    const SyntheticFinding sig{4, 4, 4, DceSign::positive};
    const SyntheticFinding low{2, 2, 2, DceSign::negative};
    CHECK(extract(generate_report({sig}, ReportVariant::sectioned, 1)).n_sig == 1);
    const auto grouped = extract(generate_report({sig, sig}, ReportVariant::grouped, 2));
    CHECK(grouped.n_sig == 2);
    bool has_multiplicity = false;
    for (const auto& f : grouped.findings) has_multiplicity |= f.multiplicity == 2;
    CHECK(has_multiplicity);
    const auto none = generate_report({}, ReportVariant::sectioned, 3);
    REQUIRE(extract(none).findings.size() == 1);
    CHECK(extract(none).findings[0].pirads == 2);
    CHECK(extract(none).n_sig == 0);
    CHECK(extract(none).status != ExtractionStatus::empty);
    CHECK(extract(generate_report({}, ReportVariant::joint, 3)).status == ExtractionStatus::strict_fallback);
    CHECK(extract(generate_report({sig, low}, ReportVariant::unparseable, 4)).status == ExtractionStatus::empty);
    CHECK(planted_n_sig({sig, low, sig}) == 2);
}

TEST_CASE("round trip over seeded random findings") {
    for (int t = 0; t < 300; ++t) {
        StreamRng rng(static_cast<std::uint64_t>(t), 1);
        std::vector<SyntheticFinding> f;
        const auto n = rng.below(5);
        for (std::uint64_t k = 0; k < n; ++k) {
            const int p = 1 + static_cast<int>(rng.below(5));
            f.push_back({p, 1 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(5)),
                         rng.below(2) ? DceSign::positive : DceSign::negative});
        }
        const auto variant = static_cast<ReportVariant>(t % 3);
        const auto e = extract(generate_report(f, variant, static_cast<std::uint64_t>(t)));
        CHECK_MESSAGE(e.n_sig == planted_n_sig(f), to_string(variant), " seed ", t);
    }
}

TEST_CASE("generated cases are consistent") {
    CaseScenario sc;
    sc.dims = {48, 48, 16};
    for (int i = 0; i < 10; ++i) {
        const auto c = generate_case(sc, 17, i);
        CHECK(c.members.size() == 3);
        CHECK(c.gt.num_labels() == c.significant_lesions);
        CHECK(extract(c.report).n_sig == c.true_n_sig);
        CHECK(c.true_n_sig == c.significant_lesions);
        for (const auto& m : c.members) CHECK_NOTHROW(m.validate_confidence());
    }
    const auto a = generate_case(sc, 17, 3);
    const auto b = generate_case(sc, 17, 3);
    CHECK(a.members == b.members);
    CHECK(a.report.body == b.report.body);
    CHECK(a.case_id == "case0003");
}

TEST_CASE("variant names") {
    for (auto v : {ReportVariant::sectioned, ReportVariant::joint, ReportVariant::grouped, ReportVariant::unparseable})
        CHECK(report_variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(report_variant_from_string("free"), ValidationError);
}

}
