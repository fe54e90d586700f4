#include "helpers.hpp"
#include "oracles.hpp"

#include "lesann/error.hpp"
#include "lesann/extraction.hpp"
#include "lesann/synthetic.hpp"

#include <doctest.h>

#include <set>

using namespace lesann;

namespace {

Volume plateau(Dims d, std::int64_t x0, std::int64_t y0, std::int64_t z0, int sx, int sy, int sz, float value) {
    auto v = Volume::filled(d, {0.5, 0.5, 3.6});
    for (std::int64_t z = z0; z < z0 + sz; ++z)
        for (std::int64_t y = y0; y < y0 + sy; ++y)
            for (std::int64_t x = x0; x < x0 + sx; ++x) v.at(x, y, z) = value;
    return v;
}

Volume two_bumps(double a, double b) {
    PhantomSpec spec;
    spec.dims = {32, 32, 32};
    spec.spacing = {1, 1, 1};
    spec.lesions = {{{8, 8, 8}, {2, 2, 2}, a}, {{23, 23, 23}, {2, 2, 2}, b}};
    return generate_phantom(spec).first;
}

std::vector<std::vector<std::int64_t>> voxel_sets(const std::vector<LesionCandidate>& c) {
    std::vector<std::vector<std::int64_t>> out;
    for (const auto& x : c) out.push_back(x.voxels);
    return out;
}

} // namespace

TEST_SUITE("extraction") {

TEST_CASE("all-zero volume gives nothing") {
    const auto v = Volume::filled({8, 8, 8}, {1, 1, 1});
    CHECK(extract_dynamic(v).empty());
    CHECK(extract_dynamic_fast(v).empty());
    CHECK(extract_static(v, 0.5).empty());
}

TEST_CASE("a 64-voxel plateau is one candidate") {
    const auto v = plateau({10, 10, 10}, 2, 2, 2, 4, 4, 4, 1.0f);
    const auto c = extract_dynamic(v);
    REQUIRE(c.size() == 1);
    CHECK(c[0].size() == 64);
    CHECK(c[0].peak_confidence == 1.0);
    CHECK(c[0].peak_index == v.dims.index(2, 2, 2));
    CHECK(extract_static(v, 0.5) == c);
    CHECK(extract_dynamic_fast(v) == c);
}

TEST_CASE("tiny blobs are discarded and do not use a slot") {
    ExtractionConfig cfg;
    auto v = plateau({20, 20, 20}, 0, 0, 0, 10, 1, 1, 0.9f); // 10 voxels
    for (int k = 0; k < 5; ++k)
        for (std::int64_t x = 0; x < 11; ++x) v.at(x, 2 + 3 * k, 5) = 0.5f - 0.05f * static_cast<float>(k);
    const auto c = extract_dynamic(v, cfg);
    REQUIRE(c.size() == 5);
    for (const auto& x : c) CHECK(x.size() == 11);
    CHECK(discard_volume_bound_cm3(cfg, {0.5, 0.5, 3.6}) == doctest::Approx(0.009).epsilon(1e-12));
}

TEST_CASE("max lesions caps the output") {
    auto v = Volume::filled({40, 4, 4}, {1, 1, 1});
    for (int k = 0; k < 6; ++k)
        for (std::int64_t x = 0; x < 3; ++x)
            for (std::int64_t y = 0; y < 2; ++y)
                for (std::int64_t z = 0; z < 2; ++z) v.at(6 * k + x, y, z) = 0.9f - 0.1f * static_cast<float>(k);
    ExtractionConfig cfg;
    cfg.min_voxels = 5;
    const auto c = extract_dynamic(v, cfg);
    REQUIRE(c.size() == 5);
    for (const auto& x : c) CHECK(x.peak_confidence > 0.35);
}

TEST_CASE("two Gaussian bumps match the region oracle") {
    const auto v = two_bumps(0.9, 0.6);
    ExtractionConfig cfg;
    const auto c = extract_dynamic(v, cfg);
    REQUIRE(c.size() >= 2);
    CHECK(c[0].peak_index == v.dims.index(8, 8, 8));
    CHECK(c[1].peak_index == v.dims.index(23, 23, 23));
    CHECK(voxel_sets(c) == oracle::dynamic_regions(v, 0.4, 5, 10, 0.1, 26));
}

TEST_CASE("random volumes match the region oracle for every connectivity") {
    for (int t = 0; t < 60; ++t) {
        const Dims d{4 + t % 5, 3 + t % 4, 2 + t % 3};
        const auto v = testing::random_volume(d, 300 + static_cast<std::uint64_t>(t), 0.7);
        ExtractionConfig cfg;
        cfg.connectivity = connectivity_from_int(t % 3 == 0 ? 6 : t % 3 == 1 ? 18 : 26);
        cfg.min_voxels = t % 4;
        cfg.rel_threshold = 0.3 + 0.1 * (t % 4);
        cfg.max_lesions = 1 + t % 6;
        const auto c = extract_dynamic(v, cfg);
        REQUIRE(voxel_sets(c) == oracle::dynamic_regions(v, cfg.rel_threshold, cfg.max_lesions, cfg.min_voxels,
                                                         cfg.min_peak, static_cast<int>(cfg.connectivity)));
    }
}

TEST_CASE("candidate invariants") {
    for (int t = 0; t < 30; ++t) {
        const auto v = testing::random_volume({9, 9, 5}, 900 + static_cast<std::uint64_t>(t), 0.6);
        ExtractionConfig cfg;
        cfg.min_voxels = 2;
        const auto c = extract_dynamic(v, cfg);
        std::set<std::int64_t> seen;
        for (std::size_t k = 0; k < c.size(); ++k) {
            CHECK(static_cast<int>(c[k].size()) > cfg.min_voxels);
            CHECK(c[k].peak_confidence >= cfg.min_peak);
            if (k) CHECK(c[k].peak_confidence <= c[k - 1].peak_confidence);
            for (auto i : c[k].voxels) {
                CHECK(seen.insert(i).second);
                CHECK(v[i] <= c[k].peak_confidence);
            }
            CHECK(std::binary_search(c[k].voxels.begin(), c[k].voxels.end(), c[k].peak_index));
        }
        CHECK(extract_dynamic(v, cfg) == c);
    }
}

TEST_CASE("argmax ties go to the lowest index") {
    std::vector<float> x{0.2f, 0.7f, 0.1f, 0.7f};
    CHECK(argmax_lowest(x) == 1);
}

TEST_CASE("scaling the map and the floor keeps the voxel sets") {
    const auto v = testing::random_volume({10, 10, 6}, 4242, 0.8);
    ExtractionConfig cfg;
    cfg.min_voxels = 3;
    const auto base = extract_dynamic(v, cfg);
    // Powers of two scale float values exactly.
    for (float c : {0.5f, 0.25f}) {
        auto s = v;
        for (auto& x : s.data) x *= c;
        auto scaled = cfg;
        scaled.min_peak = cfg.min_peak * c;
        CHECK(voxel_sets(extract_dynamic(s, scaled)) == voxel_sets(base));
    }
}

TEST_CASE("static threshold merges bumps joined by a ridge") {
    auto v = Volume::filled({30, 5, 5}, {1, 1, 1});
    for (std::int64_t x = 0; x < 30; ++x) v.at(x, 2, 2) = 0.5f;
    for (std::int64_t x : {3, 4, 5}) v.at(x, 2, 2) = 0.9f;
    for (std::int64_t x : {24, 25, 26}) v.at(x, 2, 2) = 0.8f;
    ExtractionConfig cfg;
    cfg.min_voxels = 0;
    CHECK(extract_static(v, 0.45, cfg).size() == 1);
    CHECK(extract_static(v, 0.55, cfg).size() == 2);
    CHECK(extract_static(v, 0.95, cfg).empty());
    CHECK_THROWS_AS(extract_static(v, 1.0, cfg), ValidationError);
    CHECK_THROWS_AS(extract_static(v, 0.0, cfg), ValidationError);
}

TEST_CASE("dynamic-fast on a single bump equals dynamic") {
    PhantomSpec spec;
    spec.dims = {20, 20, 20};
    spec.lesions = {{{10, 10, 10}, {2, 2, 2}, 0.8}};
    const auto v = generate_phantom(spec).first;
    ExtractionConfig cfg;
    cfg.max_lesions = 1;
    CHECK(extract_dynamic_fast(v, cfg) == extract_dynamic(v, cfg));
}

TEST_CASE("dynamic-fast equals static at the scaled global maximum") {
    const auto v = two_bumps(0.9, 0.5);
    ExtractionConfig cfg;
    const auto fast = extract_dynamic_fast(v, cfg);
    CHECK(fast == extract_static(v, 0.4f * 0.9f, cfg));
    const auto comps = oracle::components(
        [&] {
            std::vector<std::uint8_t> m(v.data.size());
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = v.data[i] >= 0.4 * static_cast<double>(v.data[v.dims.index(8, 8, 8)]);
            return m;
        }(),
        v.dims, 26);
    std::size_t kept = 0;
    for (const auto& c : comps) kept += c.size() > 10;
    CHECK(fast.size() == kept);
}

TEST_CASE("Otsu on a bimodal volume") {
    auto v = Volume::filled({10, 10, 1}, {1, 1, 1}, 0.1f);
    for (std::size_t i = 0; i < 50; ++i) v.data[i] = 0.9f;
    const double t = otsu_threshold(v);
    CHECK(t > 0.1);
    CHECK(t <= 0.9);
    CHECK(t == oracle::otsu(v));
    CHECK_THROWS_AS(otsu_threshold(Volume::filled({3, 3, 3}, {1, 1, 1}, 0.4f)), ValidationError);
}

TEST_CASE("Otsu matches the exhaustive sweep") {
    for (int t = 0; t < 20; ++t) {
        StreamRng rng(50 + static_cast<std::uint64_t>(t), 0);
        auto v = Volume::filled({12, 12, 4}, {1, 1, 1});
        for (auto& x : v.data) {
            const double mu = rng.uniform() < 0.7 ? 0.2 : 0.7;
            x = static_cast<float>(std::clamp(mu + 0.08 * rng.normal(), 0.0, 1.0));
        }
        CHECK(otsu_threshold(v) == oracle::otsu(v));
    }
}

TEST_CASE("config validation and method names") {
    ExtractionConfig cfg;
    cfg.rel_threshold = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.max_lesions = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    for (auto m : {ExtractionMethod::dynamic, ExtractionMethod::dynamic_fast, ExtractionMethod::static_threshold, ExtractionMethod::otsu})
        CHECK(extraction_method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(extraction_method_from_string("watershed"), ValidationError);
    auto bad = Volume::filled({2, 2, 2}, {1, 1, 1}, 2.0f);
    CHECK_THROWS_AS(extract_dynamic(bad), ValidationError);
}

TEST_CASE("mean ranking reorders") {
    auto v = Volume::filled({30, 3, 3}, {1, 1, 1});
    // Candidate A: sharp peak 0.9 over a 0.4 shoulder; candidate B: flat 0.7.
    for (std::int64_t x = 0; x < 10; ++x)
        for (std::int64_t y = 0; y < 3; ++y) v.at(x, y, 0) = 0.4f;
    v.at(5, 1, 0) = 0.9f;
    for (std::int64_t x = 15; x < 25; ++x)
        for (std::int64_t y = 0; y < 3; ++y) v.at(x, y, 0) = 0.7f;
    ExtractionConfig cfg;
    cfg.min_voxels = 5;
    const auto by_peak = extract_dynamic(v, cfg);
    cfg.ranking = RankingKey::mean;
    const auto by_mean = extract_dynamic(v, cfg);
    REQUIRE(by_peak.size() == 2);
    REQUIRE(by_mean.size() == 2);
    CHECK(by_peak[0].peak_confidence == doctest::Approx(0.9));
    CHECK(by_mean[0].peak_confidence == doctest::Approx(0.7));
}

}
