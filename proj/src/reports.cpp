#include "lesann/reports.hpp"

#include "lesann/error.hpp"

#include <algorithm>
#include <regex>

namespace lesann {

const char* to_string(ExtractionStatus s) {
    switch (s) {
    case ExtractionStatus::sectioned: return "sectioned";
    case ExtractionStatus::strict_fallback: return "strict-fallback";
    case ExtractionStatus::empty: return "empty";
    }
    return "unknown";
}

NormalizedText normalize_text(const std::string& text) {
    NormalizedText out;
    out.text.reserve(text.size());
    out.origin.reserve(text.size());
    auto emit = [&](char c, std::size_t at) {
        out.text.push_back(c);
        out.origin.push_back(at);
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto b = static_cast<unsigned char>(text[i]);
        if (b == ' ' || b == '\t' || b == '\n' || b == '\r' || b == '\f' || b == '\v') {
            if (out.text.empty() || out.text.back() != ' ') emit(' ', i);
            continue;
        }
        if (b < 0x80) {
            emit(static_cast<char>(b >= 'A' && b <= 'Z' ? b - 'A' + 'a' : b), i);
            continue;
        }
        // Latin-1 supplement letters (U+00C0..U+00FF).
        if (b == 0xC3 && i + 1 < text.size()) {
            const auto c = static_cast<unsigned char>(text[i + 1]) | 0x20; // fold upper to lower
            char base = 0;
            if (c >= 0xA0 && c <= 0xA5) base = 'a';
            else if (c == 0xA7) base = 'c';
            else if (c >= 0xA8 && c <= 0xAB) base = 'e';
            else if (c >= 0xAC && c <= 0xAF) base = 'i';
            else if (c == 0xB1) base = 'n';
            else if ((c >= 0xB2 && c <= 0xB6) || c == 0xB8) base = 'o';
            else if (c >= 0xB9 && c <= 0xBC) base = 'u';
            else if (c == 0xBD || c == 0xBF) base = 'y';
            if (base) {
                emit(base, i);
                ++i;
                continue;
            }
        }
        // No-break space.
        if (b == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0) {
            if (out.text.empty() || out.text.back() != ' ') emit(' ', i);
            ++i;
            continue;
        }
        // U+2010..U+2015 dashes and U+2212 minus.
        if (b == 0xE2 && i + 2 < text.size()) {
            const auto c1 = static_cast<unsigned char>(text[i + 1]);
            const auto c2 = static_cast<unsigned char>(text[i + 2]);
            if ((c1 == 0x80 && c2 >= 0x90 && c2 <= 0x95) || (c1 == 0x88 && c2 == 0x92)) {
                emit('-', i);
                i += 2;
                continue;
            }
        }
        emit(static_cast<char>(b), i);
    }
    return out;
}

namespace {

using std::regex;
constexpr auto kFlags = regex::ECMAScript | regex::optimize;

// Score followed by neither another digit nor a decimal part.
#define LESANN_SCORE "([1-5])(?![.,]?\\d)"

// Header identifiers: "1", "1+2". A size such as "12 mm" or "7,5 cm" is not
// an identifier, and the digit lookahead stops backtracking into "1" of "12".
#define LESANN_IDENTIFIERS R"((\d+(?:\s*\+\s*\d+)*)(?!\d)(?![.,]\d)(?!\s*(?:mm|cm|%)))"

const regex& dutch_header() {
    static const regex r(R"(\b(?:afwijking|laesie|markering|regio)(?![a-z])\s*(?:(?:nr\.|mark|nummer)\s*)?)"
                         LESANN_IDENTIFIERS,
                         kFlags);
    return r;
}

const regex& any_header() {
    static const regex r(R"(\b(?:afwijking|laesie|markering|regio|lesion|finding)(?![a-z])\s*(?:(?:nr\.|mark|nummer)\s*)?)"
                         LESANN_IDENTIFIERS,
                         kFlags);
    return r;
}

const regex& english_header() {
    static const regex r(R"(\b(?:lesion|finding)(?![a-z])\s*(?:(?:nr\.|mark|nummer)\s*)?)"
                         LESANN_IDENTIFIERS,
                         kFlags);
    return r;
}

const regex& header_pattern(LanguageProfile profile) {
    switch (profile) {
    case LanguageProfile::dutch: return dutch_header();
    case LanguageProfile::english: return english_header();
    case LanguageProfile::both: break;
    }
    return any_header();
}

const regex& pirads_pattern() {
    static const regex r(R"(\bpi[- ]?rads(?:\s*v2(?:\.1)?)?(?:\s*category)?\s*:?\s*)" LESANN_SCORE, kFlags);
    return r;
}

const regex& joint_pattern() {
    static const regex r(
        R"(\bt2-?w?\s*/\s*dwi\s*/\s*dce\s*(?:scores?)?\s*:?\s*([1-5])\s*/\s*([1-5])\s*/\s*([+-])(?![a-z0-9]))",
        kFlags);
    return r;
}

const regex& t2w_pattern() {
    static const regex r(R"(\bt2-?w\s*(?:score)?\s*:?\s*)" LESANN_SCORE, kFlags);
    return r;
}

const regex& dwi_pattern() {
    static const regex r(R"(\bdwi\s*(?:score)?\s*:?\s*)" LESANN_SCORE, kFlags);
    return r;
}

const regex& dce_pattern() {
    static const regex r(R"(\bdce\s*(?:score)?\s*:?\s*([+-])(?![a-z0-9]))", kFlags);
    return r;
}

#undef LESANN_SCORE

std::optional<std::vector<int>> parse_identifiers(const std::string& s) {
    std::vector<int> ids;
    int current = -1;
    for (char c : s) {
        if (c >= '0' && c <= '9') {
            current = (current < 0 ? 0 : current) * 10 + (c - '0');
            if (current > 1000000) return std::nullopt;
        } else if (c == '+') {
            ids.push_back(current);
            current = -1;
        }
    }
    ids.push_back(current);
    if (std::any_of(ids.begin(), ids.end(), [](int id) { return id < 1; })) return std::nullopt;
    return ids;
}

DceSign dce_sign(const std::string& s) { return s == "+" ? DceSign::positive : DceSign::negative; }

struct JointMatch {
    int t2w;
    int dwi;
    DceSign dce;
};

std::vector<JointMatch> joint_matches(const std::string& text) {
    std::vector<JointMatch> out;
    for (std::sregex_iterator it(text.begin(), text.end(), joint_pattern()), end; it != end; ++it) {
        const auto& m = *it;
        out.push_back({std::stoi(m[1].str()), std::stoi(m[2].str()), dce_sign(m[3].str())});
    }
    return out;
}

std::vector<int> pirads_mentions(const std::string& text) {
    std::vector<int> out;
    for (std::sregex_iterator it(text.begin(), text.end(), pirads_pattern()), end; it != end; ++it)
        out.push_back(std::stoi((*it)[1].str()));
    return out;
}

std::optional<int> first_score(const std::string& text, const regex& pattern) {
    std::smatch m;
    if (std::regex_search(text, m, pattern)) return std::stoi(m[1].str());
    return std::nullopt;
}

} // namespace

std::vector<LesionSection> split_sections(const Report& report, LanguageProfile profile) {
    const NormalizedText norm = normalize_text(report.body);
    const std::string& text = norm.text;

    struct Header {
        std::size_t begin;
        std::size_t end;
        std::vector<int> identifiers;
    };
    std::vector<Header> headers;
    for (std::sregex_iterator it(text.begin(), text.end(), header_pattern(profile)), end; it != end; ++it) {
        const auto& m = *it;
        auto ids = parse_identifiers(m[1].str());
        if (!ids) continue;
        const auto begin = static_cast<std::size_t>(m.position(0));
        headers.push_back({begin, begin + static_cast<std::size_t>(m.length(0)), std::move(*ids)});
    }

    std::vector<LesionSection> sections;
    sections.reserve(headers.size());
    for (std::size_t k = 0; k < headers.size(); ++k) {
        const std::size_t from = headers[k].end;
        const std::size_t to = k + 1 < headers.size() ? headers[k + 1].begin : text.size();
        const std::size_t raw_from = from < norm.origin.size() ? norm.origin[from] : report.body.size();
        const std::size_t raw_to = to < norm.origin.size() ? norm.origin[to] : report.body.size();
        sections.push_back({headers[k].identifiers, report.body.substr(raw_from, raw_to - raw_from)});
    }
    return sections;
}

std::optional<FindingScores> extract_scores_section(const LesionSection& section) {
    const std::string text = normalize_text(section.text).text;
    FindingScores s;
    s.multiplicity = std::max<int>(1, static_cast<int>(section.identifiers.size()));

    s.pirads = first_score(text, pirads_pattern());
    if (const auto joint = joint_matches(text); !joint.empty()) {
        s.t2w = joint.front().t2w;
        s.dwi = joint.front().dwi;
        s.dce = joint.front().dce;
    }
    if (!s.t2w) s.t2w = first_score(text, t2w_pattern());
    if (!s.dwi) s.dwi = first_score(text, dwi_pattern());
    if (!s.dce) {
        std::smatch m;
        if (std::regex_search(text, m, dce_pattern())) s.dce = dce_sign(m[1].str());
    }
    if (!s.has_any_score()) return std::nullopt;
    return s;
}

std::vector<FindingScores> extract_strict(const Report& report) {
    const std::string text = normalize_text(report.body).text;
    const auto joint = joint_matches(text);
    if (joint.empty()) return {};
    const auto pirads = pirads_mentions(text);

    std::vector<FindingScores> out;
    out.reserve(joint.size());
    for (std::size_t i = 0; i < joint.size(); ++i) {
        FindingScores s;
        s.t2w = joint[i].t2w;
        s.dwi = joint[i].dwi;
        s.dce = joint[i].dce;
        if (i < pirads.size()) s.pirads = pirads[i];
        out.push_back(s);
    }
    return out;
}

int count_significant(const std::vector<FindingScores>& findings) {
    int n = 0;
    for (const auto& f : findings)
        if (f.significant()) n += f.multiplicity;
    return n;
}

ReportExtraction extract(const Report& report, LanguageProfile profile) {
    ReportExtraction out;
    for (const auto& section : split_sections(report, profile))
        if (auto scores = extract_scores_section(section)) out.findings.push_back(*scores);

    if (!out.findings.empty()) {
        out.status = ExtractionStatus::sectioned;
    } else if (auto strict = extract_strict(report); !strict.empty()) {
        out.findings = std::move(strict);
        out.status = ExtractionStatus::strict_fallback;
    } else {
        out.status = ExtractionStatus::empty;
    }
    out.n_sig = count_significant(out.findings);
    return out;
}

int ConfusionMatrix::total() const {
    int n = 0;
    for (const auto& row : counts)
        for (int c : row) n += c;
    return n;
}

int ConfusionMatrix::trace() const {
    int n = 0;
    for (int k = 0; k < kBuckets; ++k) n += counts[k][k];
    return n;
}

double ConfusionMatrix::accuracy() const {
    const int n = total();
    return n == 0 ? 0.0 : static_cast<double>(trace()) / n;
}

ConfusionMatrix evaluate_counts(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw ValidationError("predicted and truth count lists differ in length");
    if (predicted.empty()) throw ValidationError("count lists are empty");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0 || truth[i] < 0) throw ValidationError("finding counts must be non-negative");
        const int p = std::min(predicted[i], ConfusionMatrix::kBuckets - 1);
        const int t = std::min(truth[i], ConfusionMatrix::kBuckets - 1);
        ++m.counts[t][p];
    }
    return m;
}

} // namespace lesann
