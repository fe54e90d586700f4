#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace lesann {

struct Report {
    std::string case_id;
    std::string body;
};

// Which lesion-header vocabulary is accepted when splitting sections.
enum class LanguageProfile { dutch, english, both };

struct LesionSection {
    std::vector<int> identifiers;
    std::string text;
};

enum class DceSign { negative, positive };

struct FindingScores {
    std::optional<int> pirads;
    std::optional<int> t2w;
    std::optional<int> dwi;
    std::optional<DceSign> dce;
    int multiplicity = 1;

    bool has_any_score() const { return pirads || t2w || dwi || dce; }
    bool significant() const { return pirads && *pirads >= 4; }

    friend bool operator==(const FindingScores&, const FindingScores&) = default;
};

enum class ExtractionStatus { sectioned, strict_fallback, empty };

const char* to_string(ExtractionStatus s);

struct ReportExtraction {
    std::vector<FindingScores> findings;
    int n_sig = 0;
    ExtractionStatus status = ExtractionStatus::empty;
};

std::vector<LesionSection> split_sections(const Report& report, LanguageProfile profile = LanguageProfile::both);

// nullopt when the section carries no recognisable score.
std::optional<FindingScores> extract_scores_section(const LesionSection& section);

// Joint T2W/DWI/DCE matches over the whole report, paired with PI-RADS
// mentions in document order.
std::vector<FindingScores> extract_strict(const Report& report);

ReportExtraction extract(const Report& report, LanguageProfile profile = LanguageProfile::both);

// Sum of multiplicities over findings with PI-RADS >= 4.
int count_significant(const std::vector<FindingScores>& findings);

// Counts are bucketed 0..5, where 5 means "5 or more".
struct ConfusionMatrix {
    static constexpr int kBuckets = 6;
    std::array<std::array<int, kBuckets>, kBuckets> counts{}; // [truth][predicted]

    int total() const;
    int trace() const;
    double accuracy() const;
};

ConfusionMatrix evaluate_counts(const std::vector<int>& predicted, const std::vector<int>& truth);

// Lower-cases ASCII, collapses whitespace runs to one space, strips common
// Latin-1 diacritics and maps Unicode minus/dashes to '-'. `origin[i]` is the
// byte offset in `text` that produced output byte i.
struct NormalizedText {
    std::string text;
    std::vector<std::size_t> origin;
};
NormalizedText normalize_text(const std::string& text);

} // namespace lesann
