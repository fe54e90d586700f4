#pragma once

#include "lesann/annotate.hpp"
#include "lesann/metrics.hpp"
#include "lesann/reports.hpp"
#include "lesann/stats.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lesann {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// Voxel sets are written as [start, length] runs of consecutive indices.
Json runs_to_json(const std::vector<std::int64_t>& voxels);
std::vector<std::int64_t> runs_from_json(const Json& runs);

Json to_json(const LesionCandidate& c);
LesionCandidate candidate_from_json(const Json& j);

Json to_json(const FindingScores& f);
Json to_json(const ReportExtraction& e);

Json to_json(const ConfusionMatrix& m);
// Rows are true counts, columns predicted counts; the last bucket is "5+".
std::string confusion_table(const ConfusionMatrix& m);

// Outcome line without the mask payload (masks are written as volumes).
Json to_json(const AnnotationOutcome& o);

Json to_json(const FrocCurve& c);
Json to_json(const RocCurve& c);
std::string to_csv(const FrocCurve& c);
std::string to_csv(const RocCurve& c);

Json to_json(const PermutationResult& r, const std::vector<std::string>& groups);
Json to_json(const BootstrapResult& r);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

} // namespace lesann
