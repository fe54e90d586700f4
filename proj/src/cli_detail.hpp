#pragma once

#include "lesann/cli.hpp"
#include "lesann/metrics.hpp"
#include "lesann/serialize.hpp"
#include "lesann/synthetic.hpp"

#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace lesann::cli::detail {

// Effective settings after flags > config file > defaults. Enumerations are
// kept in their textual form so every setting can come from either source;
// finalize() validates them and fills the typed configs.
struct Options {
    std::string subcommand;
    std::filesystem::path manifest;
    std::filesystem::path out;
    std::filesystem::path input;
    std::filesystem::path scenario_path;

    std::uint64_t seed = 0;
    int jobs = 1;

    double rel_threshold = 0.40;
    int max_lesions = 5;
    int min_voxels = 10;
    double min_peak = 0.10;
    int connectivity = 26;
    std::string method = "dynamic";
    std::string ranking = "peak";
    double static_threshold = 0.5;
    std::string language = "both";
    double hit_iou = 0.10;
    std::string overlap = "iou";

    std::int64_t iterations = 10000;
    std::string metric = "auroc";
    std::string group_a;
    std::string group_b;

    double target = std::numeric_limits<double>::quiet_NaN();       // required by efficiency
    double n_supervised = std::numeric_limits<double>::quiet_NaN(); // optional
    int samples = 16;

    std::vector<double> fp_points{0.25, 0.5, 1.0};
    std::vector<double> sensitivity_points{0.9};
    double pauc_lo = 0.0;
    double pauc_hi = 1.0;
    bool include_missed = false;

    int cases = 50;

    // Derived by finalize().
    AnnotateConfig annotate;
    MatchConfig match;
    CaseScenario scenario;

    void finalize();
    // Settings that influence results, written to run.json and hashed.
    Json config_json() const;
};

CaseScenario scenario_from_json(const Json& j);
Json scenario_to_json(const CaseScenario& s);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

// Runs fn(i) for every case on up to `jobs` threads. Exceptions are caught per
// case and returned as messages (empty string = success), in case order.
std::vector<std::string> for_each_case(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

Json failure_line(const std::string& case_id, const std::string& message);

int cmd_parse_reports(const Options& o);
int cmd_extract(const Options& o);
int cmd_annotate(const Options& o);
int cmd_eval_localisation(const Options& o);
int cmd_eval_detection(const Options& o);
int cmd_permtest(const Options& o);
int cmd_bootstrap(const Options& o);
int cmd_efficiency(const Options& o);
int cmd_synth(const Options& o);

} // namespace lesann::cli::detail
