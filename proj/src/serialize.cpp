#include "lesann/serialize.hpp"

#include "lesann/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lesann {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error("double formatting failed");
    return std::string(buf, end);
}

Json runs_to_json(const std::vector<std::int64_t>& voxels) {
    Json runs = Json::array();
    for (std::size_t i = 0; i < voxels.size();) {
        std::size_t j = i + 1;
        while (j < voxels.size() && voxels[j] == voxels[j - 1] + 1) ++j;
        runs.push_back({voxels[i], static_cast<std::int64_t>(j - i)});
        i = j;
    }
    return runs;
}

std::vector<std::int64_t> runs_from_json(const Json& runs) {
    std::vector<std::int64_t> out;
    for (const auto& r : runs) {
        if (!r.is_array() || r.size() != 2) throw ValidationError("voxel runs must be [start, length] pairs");
        const auto start = r[0].get<std::int64_t>();
        const auto len = r[1].get<std::int64_t>();
        if (len <= 0) throw ValidationError("voxel run length must be positive");
        for (std::int64_t k = 0; k < len; ++k) out.push_back(start + k);
    }
    return out;
}

Json to_json(const LesionCandidate& c) {
    return Json{{"peak_index", c.peak_index},       {"peak_confidence", c.peak_confidence},
                {"mean_confidence", c.mean_confidence}, {"volume_cm3", c.volume_cm3},
                {"voxel_count", c.voxels.size()},   {"voxels", runs_to_json(c.voxels)}};
}

LesionCandidate candidate_from_json(const Json& j) {
    LesionCandidate c;
    c.voxels = runs_from_json(j.at("voxels"));
    c.peak_index = j.at("peak_index").get<std::int64_t>();
    c.peak_confidence = j.at("peak_confidence").get<double>();
    c.mean_confidence = j.value("mean_confidence", 0.0);
    c.volume_cm3 = j.value("volume_cm3", 0.0);
    return c;
}

namespace {

template <class T> Json optional_json(const std::optional<T>& v) { return v ? Json(*v) : Json(nullptr); }

} // namespace

Json to_json(const FindingScores& f) {
    Json dce = nullptr;
    if (f.dce) dce = *f.dce == DceSign::positive ? "+" : "-";
    return Json{{"pirads", optional_json(f.pirads)}, {"t2w", optional_json(f.t2w)}, {"dwi", optional_json(f.dwi)},
                {"dce", dce}, {"multiplicity", f.multiplicity}};
}

Json to_json(const ReportExtraction& e) {
    Json findings = Json::array();
    for (const auto& f : e.findings) findings.push_back(to_json(f));
    return Json{{"status", to_string(e.status)}, {"n_sig", e.n_sig}, {"findings", findings}};
}

Json to_json(const ConfusionMatrix& m) {
    Json rows = Json::array();
    for (const auto& row : m.counts) rows.push_back(row);
    return Json{{"labels", {"0", "1", "2", "3", "4", "5+"}}, {"counts", rows}, {"total", m.total()},
                {"correct", m.trace()}, {"accuracy", m.total() ? Json(m.accuracy()) : Json(nullptr)}};
}

std::string confusion_table(const ConfusionMatrix& m) {
    static constexpr const char* labels[] = {"0", "1", "2", "3", "4", "5+"};
    std::ostringstream os;
    char cell[32];
    os << "truth\\pred";
    for (auto l : labels) {
        std::snprintf(cell, sizeof cell, "%6s", l);
        os << cell;
    }
    os << '\n';
    for (int t = 0; t < ConfusionMatrix::kBuckets; ++t) {
        std::snprintf(cell, sizeof cell, "%10s", labels[t]);
        os << cell;
        for (int p = 0; p < ConfusionMatrix::kBuckets; ++p) {
            std::snprintf(cell, sizeof cell, "%6d", m.counts[t][p]);
            os << cell;
        }
        os << '\n';
    }
    return os.str();
}

Json to_json(const AnnotationOutcome& o) {
    Json kept = Json::array();
    for (const auto& c : o.kept)
        kept.push_back({{"peak_index", c.peak_index}, {"peak_confidence", c.peak_confidence},
                        {"voxel_count", c.voxels.size()}, {"volume_cm3", c.volume_cm3}});
    Json j{{"case_id", o.case_id}, {"status", to_string(o.status)}};
    j["reason"] = o.reason.empty() ? Json(nullptr) : Json(o.reason);
    j["n_sig"] = o.n_sig;
    j["candidate_count"] = o.candidate_count;
    j["kept"] = kept;
    return j;
}

namespace {

Json threshold_json(double t) { return std::isfinite(t) ? Json(t) : Json(nullptr); }
std::string threshold_csv(double t) { return std::isfinite(t) ? format_double(t) : ""; }

} // namespace

Json to_json(const FrocCurve& c) {
    Json pts = Json::array();
    for (const auto& p : c.points)
        pts.push_back({{"threshold", threshold_json(p.threshold)}, {"fp_per_case", p.fp_per_case},
                       {"sensitivity", p.sensitivity}});
    return pts;
}

Json to_json(const RocCurve& c) {
    Json pts = Json::array();
    for (const auto& p : c.points)
        pts.push_back({{"threshold", threshold_json(p.threshold)}, {"fpr", p.fpr}, {"tpr", p.tpr}});
    return pts;
}

std::string to_csv(const FrocCurve& c) {
    std::string out = "threshold,fp_per_case,sensitivity\n";
    for (const auto& p : c.points)
        out += threshold_csv(p.threshold) + ',' + format_double(p.fp_per_case) + ',' + format_double(p.sensitivity) + '\n';
    return out;
}

std::string to_csv(const RocCurve& c) {
    std::string out = "threshold,fpr,tpr\n";
    for (const auto& p : c.points)
        out += threshold_csv(p.threshold) + ',' + format_double(p.fpr) + ',' + format_double(p.tpr) + '\n';
    return out;
}

Json to_json(const PermutationResult& r, const std::vector<std::string>& groups) {
    return Json{{"statistic", r.statistic}, {"p", r.p}, {"iterations", r.iterations}, {"seed", r.seed},
                {"groups", groups}};
}

Json to_json(const BootstrapResult& r) {
    return Json{{"point", r.point}, {"lo", r.lo},           {"hi", r.hi},
                {"iterations", r.iterations}, {"rejected", r.rejected}, {"seed", r.seed}};
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace lesann
