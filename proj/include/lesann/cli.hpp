#pragma once

#include "lesann/annotate.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lesann::cli {

inline constexpr const char* kToolName = "lesann";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { ok = 0, validation_failure = 1, partial_failure = 2 };

// Manifest line: a CaseRecord plus the fields only the CLI understands.
struct ManifestCase {
    CaseRecord record;
    std::optional<std::filesystem::path> report_path; // read lazily, per case
    std::optional<int> truth_n_sig;
};

// JSON Lines, one case per non-blank line. Relative paths are resolved
// against the manifest's directory. Throws ValidationError on malformed
// lines, duplicate case ids or an empty manifest.
std::vector<ManifestCase> load_manifest(const std::filesystem::path& path);

// Report text of a case, reading report_path when the text is not inline.
std::optional<std::string> report_text(const ManifestCase& c);

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args); // args exclude the program name

} // namespace lesann::cli
