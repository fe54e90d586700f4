#include "cli_detail.hpp"

#include "lesann/error.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace lesann::cli {

namespace fs = std::filesystem;
using namespace detail;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) throw ValidationError("empty path in manifest");
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ManifestCase parse_manifest_line(const Json& j, const fs::path& base) {
    if (!j.is_object()) throw ValidationError("manifest line is not a JSON object");
    static const std::set<std::string> known{"case_id", "volume_paths", "report", "report_path",
                                             "gt_path", "n_sig_override", "truth_n_sig"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ValidationError("unknown manifest key '" + key + "'");

    ManifestCase c;
    if (!j.contains("case_id") || !j["case_id"].is_string() || j["case_id"].get<std::string>().empty())
        throw ValidationError("manifest line needs a non-empty string case_id");
    c.record.case_id = j["case_id"].get<std::string>();
    const auto& vp = j.value("volume_paths", Json::array());
    if (!vp.is_array()) throw ValidationError(c.record.case_id + ": volume_paths must be an array");
    for (const auto& p : vp) c.record.volume_paths.push_back(resolve(base, p.get<std::string>()));
    if (j.contains("report") && j.contains("report_path"))
        throw ValidationError(c.record.case_id + ": give either report or report_path, not both");
    if (j.contains("report") && !j["report"].is_null()) c.record.report_text = j["report"].get<std::string>();
    if (j.contains("report_path") && !j["report_path"].is_null())
        c.report_path = resolve(base, j["report_path"].get<std::string>());
    if (j.contains("gt_path") && !j["gt_path"].is_null()) c.record.gt_path = resolve(base, j["gt_path"].get<std::string>());
    if (j.contains("n_sig_override") && !j["n_sig_override"].is_null()) {
        const int n = j["n_sig_override"].get<int>();
        if (n < 0) throw ValidationError(c.record.case_id + ": n_sig_override must be non-negative");
        c.record.n_sig_override = n;
    }
    if (j.contains("truth_n_sig") && !j["truth_n_sig"].is_null()) {
        const int n = j["truth_n_sig"].get<int>();
        if (n < 0) throw ValidationError(c.record.case_id + ": truth_n_sig must be non-negative");
        c.truth_n_sig = n;
    }
    return c;
}

} // namespace

std::vector<ManifestCase> load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open manifest " + path.string());
    const fs::path base = path.parent_path();
    std::vector<ManifestCase> cases;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
        try {
            auto c = parse_manifest_line(j, base);
            if (!seen.insert(c.record.case_id).second)
                throw ValidationError("duplicate case_id '" + c.record.case_id + "'");
            cases.push_back(std::move(c));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (cases.empty()) throw ValidationError("manifest " + path.filename().string() + " lists no cases");
    return cases;
}

std::optional<std::string> report_text(const ManifestCase& c) {
    if (c.record.report_text) return c.record.report_text;
    if (c.report_path) return read_file(*c.report_path);
    return std::nullopt;
}

namespace detail {

void Options::finalize() {
    annotate.extraction.rel_threshold = rel_threshold;
    annotate.extraction.max_lesions = max_lesions;
    annotate.extraction.min_voxels = min_voxels;
    annotate.extraction.min_peak = min_peak;
    annotate.extraction.connectivity = connectivity_from_int(connectivity);
    if (ranking == "peak") annotate.extraction.ranking = RankingKey::peak;
    else if (ranking == "mean") annotate.extraction.ranking = RankingKey::mean;
    else throw ValidationError("ranking must be 'peak' or 'mean'");
    annotate.extraction.validate();
    annotate.method = extraction_method_from_string(method);
    if (!(static_threshold > 0.0 && static_threshold < 1.0)) throw ValidationError("static threshold must lie in (0, 1)");
    annotate.static_threshold = static_threshold;
    if (language == "dutch") annotate.language = LanguageProfile::dutch;
    else if (language == "english") annotate.language = LanguageProfile::english;
    else if (language == "both") annotate.language = LanguageProfile::both;
    else throw ValidationError("language must be dutch, english or both");

    match.hit_threshold = hit_iou;
    if (overlap == "iou") match.criterion = OverlapCriterion::iou;
    else if (overlap == "dice") match.criterion = OverlapCriterion::dice;
    else throw ValidationError("overlap must be 'iou' or 'dice'");
    match.validate();

    if (jobs < 1) throw ValidationError("--jobs must be at least 1");
    if (iterations < 1) throw ValidationError("--iterations must be positive");
    if (!(pauc_lo >= 0.0 && pauc_hi > pauc_lo)) throw ValidationError("pAUC interval must satisfy 0 <= lo < hi");
    if (cases < 1) throw ValidationError("--cases must be positive");
}

Json Options::config_json() const {
    Json j{{"rel_threshold", rel_threshold},
           {"max_lesions", max_lesions},
           {"min_voxels", min_voxels},
           {"min_peak", min_peak},
           {"connectivity", connectivity},
           {"method", method},
           {"ranking", ranking},
           {"static_threshold", static_threshold},
           {"language", language},
           {"hit_iou", hit_iou},
           {"overlap", overlap},
           {"iterations", iterations},
           {"metric", metric},
           {"group_a", group_a},
           {"group_b", group_b},
           {"target", target},
           {"n_supervised", n_supervised},
           {"samples", samples},
           {"fp_points", fp_points},
           {"sensitivity_points", sensitivity_points},
           {"pauc_lo", pauc_lo},
           {"pauc_hi", pauc_hi},
           {"include_missed", include_missed},
           {"cases", cases}};
    if (subcommand == "synth") j["scenario"] = scenario_to_json(scenario);
    return j;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_jsonl(const fs::path& path, const std::vector<Json>& lines) {
    std::string text;
    for (const auto& l : lines) text += l.dump() + "\n";
    write_text(path, text);
}

std::vector<std::string> for_each_case(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what()[0] ? e.what() : "unknown error";
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = "unknown error";
        }
    }
    return errors;
}

Json failure_line(const std::string& case_id, const std::string& message) {
    return Json{{"case_id", case_id}, {"status", "failed"}, {"error", message}};
}

} // namespace detail

namespace {

struct Binding {
    std::string key;
    std::vector<CLI::Option*> flags;
    std::function<void(Options&, const Options&)> copy;
    std::function<void(Options&, const Json&)> load;
};

class Registry {
public:
    explicit Registry(Options& flags) : flags_(flags) {}

    template <class T, class Get>
    void add(std::vector<CLI::App*> apps, const std::string& flag, const std::string& key, Get get, const std::string& help) {
        Binding b;
        b.key = key;
        for (auto* app : apps) {
            if constexpr (std::is_same_v<T, bool>) b.flags.push_back(app->add_flag(flag, get(flags_), help));
            else b.flags.push_back(app->add_option(flag, get(flags_), help));
        }
        b.copy = [get](Options& dst, const Options& src) { get(dst) = get(const_cast<Options&>(src)); };
        b.load = [get, key](Options& dst, const Json& j) {
            try {
                get(dst) = j.at(key).template get<T>();
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError("config key '" + key + "': " + e.what());
            }
        };
        bindings_.push_back(std::move(b));
    }

    Options resolve(const Json& config) const {
        for (const auto& [key, _] : config.items()) {
            bool known = false;
            for (const auto& b : bindings_) known |= b.key == key;
            if (!known) throw ValidationError("unknown config key '" + key + "'");
        }
        Options eff;
        for (const auto& b : bindings_) {
            bool given = false;
            for (auto* f : b.flags) given |= f->count() > 0;
            if (given) b.copy(eff, flags_);
            else if (config.contains(b.key)) b.load(eff, config);
        }
        return eff;
    }

private:
    Options& flags_;
    std::vector<Binding> bindings_;
};

Json load_config(const fs::path& path) {
    if (path.empty()) return Json::object();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config " + path.string());
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    return j;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_run_manifest(const Options& o) {
    const Json config = o.config_json();
    Json run{{"tool", kToolName},
             {"version", kToolVersion},
             {"subcommand", o.subcommand},
             {"config", config},
             {"config_hash", hex64(fnv1a(config.dump()))},
             {"seed", o.seed}};
    write_json(o.out / "run.json", run);
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Report-guided lesion annotation and detection evaluation", kToolName};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    Options flags;
    Registry reg(flags);
    fs::path config_path;

    auto* parse_reports = app.add_subcommand("parse-reports", "Extract PI-RADS findings and n_sig from reports");
    auto* extract = app.add_subcommand("extract", "Extract lesion candidates from confidence volumes");
    auto* annotate = app.add_subcommand("annotate", "Report-guided annotation masks");
    auto* eval_loc = app.add_subcommand("eval-localisation", "Lesion-level sensitivity and FP/case, with and without report masking");
    auto* eval_det = app.add_subcommand("eval-detection", "AUROC, pAUC, operating points and DSC");
    auto* permtest = app.add_subcommand("permtest", "One-sided permutation test between two groups of runs");
    auto* bootstrap = app.add_subcommand("bootstrap", "Bootstrap 95% interval of a case-level metric");
    auto* efficiency = app.add_subcommand("efficiency", "Annotation-efficiency from performance-versus-budget points");
    auto* synth = app.add_subcommand("synth", "Generate a synthetic manifest, volumes and reports");

    const std::vector<CLI::App*> all{parse_reports, extract, annotate, eval_loc, eval_det, permtest, bootstrap, efficiency, synth};
    const std::vector<CLI::App*> manifest_cmds{parse_reports, extract, annotate, eval_loc, eval_det};
    const std::vector<CLI::App*> volume_cmds{extract, annotate, eval_loc, eval_det};
    const std::vector<CLI::App*> eval_cmds{eval_loc, eval_det};
    const std::vector<CLI::App*> report_cmds{parse_reports, annotate, eval_loc};

    for (auto* sub : all) {
        sub->add_option("--out", flags.out, "Output directory")->required();
        sub->add_option("--config", config_path, "JSON config file (flags take precedence)");
    }
    for (auto* sub : manifest_cmds) sub->add_option("--manifest", flags.manifest, "Case manifest (JSON Lines)")->required();
    for (auto* sub : {permtest, bootstrap, efficiency})
        sub->add_option("--input", flags.input, "Input CSV")->required();
    synth->add_option("--scenario", flags.scenario_path, "Scenario file (JSON)");

    using O = Options;
    reg.add<std::uint64_t>(all, "--seed", "seed", [](O& o) -> auto& { return o.seed; }, "Random seed");
    reg.add<int>(all, "--jobs", "jobs", [](O& o) -> auto& { return o.jobs; }, "Parallel cases");
    reg.add<double>(volume_cmds, "--rel-threshold", "rel_threshold", [](O& o) -> auto& { return o.rel_threshold; }, "Blob growth fraction of the peak");
    reg.add<int>(volume_cmds, "--max-lesions", "max_lesions", [](O& o) -> auto& { return o.max_lesions; }, "Maximum candidates per case");
    reg.add<int>(volume_cmds, "--min-voxels", "min_voxels", [](O& o) -> auto& { return o.min_voxels; }, "Discard candidates with this many voxels or fewer");
    reg.add<double>(volume_cmds, "--min-peak", "min_peak", [](O& o) -> auto& { return o.min_peak; }, "Stop when the remaining maximum is below this");
    reg.add<int>(volume_cmds, "--connectivity", "connectivity", [](O& o) -> auto& { return o.connectivity; }, "6, 18 or 26");
    reg.add<std::string>(volume_cmds, "--method", "method", [](O& o) -> auto& { return o.method; }, "dynamic, dynamic-fast, static or otsu");
    reg.add<std::string>(volume_cmds, "--ranking", "ranking", [](O& o) -> auto& { return o.ranking; }, "peak or mean");
    reg.add<double>(volume_cmds, "--static-threshold", "static_threshold", [](O& o) -> auto& { return o.static_threshold; }, "Threshold for the static method");
    reg.add<std::string>(report_cmds, "--language", "language", [](O& o) -> auto& { return o.language; }, "dutch, english or both");
    reg.add<double>(eval_cmds, "--hit-iou", "hit_iou", [](O& o) -> auto& { return o.hit_iou; }, "Overlap needed for a hit");
    reg.add<std::string>(eval_cmds, "--overlap", "overlap", [](O& o) -> auto& { return o.overlap; }, "iou or dice");
    reg.add<std::vector<double>>(eval_cmds, "--fp-points", "fp_points", [](O& o) -> auto& { return o.fp_points; }, "FP/case operating points");
    reg.add<double>(eval_cmds, "--pauc-lo", "pauc_lo", [](O& o) -> auto& { return o.pauc_lo; }, "pAUC lower FP/case bound");
    reg.add<double>(eval_cmds, "--pauc-hi", "pauc_hi", [](O& o) -> auto& { return o.pauc_hi; }, "pAUC upper FP/case bound");
    reg.add<std::vector<double>>({eval_det}, "--sensitivity-points", "sensitivity_points", [](O& o) -> auto& { return o.sensitivity_points; }, "Sensitivities for specificity read-out");
    reg.add<bool>({eval_det}, "--include-missed", "include_missed", [](O& o) -> auto& { return o.include_missed; }, "Count missed lesions as DSC 0");
    reg.add<std::int64_t>({permtest, bootstrap}, "--iterations", "iterations", [](O& o) -> auto& { return o.iterations; }, "Resampling iterations");
    reg.add<std::string>({bootstrap}, "--metric", "metric", [](O& o) -> auto& { return o.metric; }, "auroc or mean");
    reg.add<std::string>({permtest}, "--group-a", "group_a", [](O& o) -> auto& { return o.group_a; }, "Group tested for superiority");
    reg.add<std::string>({permtest}, "--group-b", "group_b", [](O& o) -> auto& { return o.group_b; }, "Reference group");
    reg.add<double>({efficiency}, "--target", "target", [](O& o) -> auto& { return o.target; }, "Supervised performance to match");
    reg.add<double>({efficiency}, "--n-supervised", "n_supervised", [](O& o) -> auto& { return o.n_supervised; }, "Supervised annotation count");
    reg.add<int>({efficiency}, "--samples", "samples", [](O& o) -> auto& { return o.samples; }, "Curve samples per bracket");
    reg.add<int>({synth}, "--cases", "cases", [](O& o) -> auto& { return o.cases; }, "Number of synthetic cases");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::CallForVersion&) {
        std::cout << kToolName << ' ' << kToolVersion << '\n';
        return ok;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation_failure;
    }

    try {
        Options o = reg.resolve(load_config(config_path));
        o.subcommand = app.get_subcommands().front()->get_name();
        o.manifest = flags.manifest;
        o.out = flags.out;
        o.input = flags.input;
        o.scenario_path = flags.scenario_path;
        if (o.subcommand == "synth" && !o.scenario_path.empty()) {
            const Json sj = load_config(o.scenario_path);
            o.scenario = scenario_from_json(sj);
            const bool cases_flag = synth->get_option("--cases")->count() > 0;
            if (!cases_flag && sj.contains("cases")) o.cases = sj["cases"].get<int>();
        }
        o.finalize();
        if (o.subcommand == "synth") o.scenario.validate();

        int code = ok;
        if (o.subcommand == "parse-reports") code = cmd_parse_reports(o);
        else if (o.subcommand == "extract") code = cmd_extract(o);
        else if (o.subcommand == "annotate") code = cmd_annotate(o);
        else if (o.subcommand == "eval-localisation") code = cmd_eval_localisation(o);
        else if (o.subcommand == "eval-detection") code = cmd_eval_detection(o);
        else if (o.subcommand == "permtest") code = cmd_permtest(o);
        else if (o.subcommand == "bootstrap") code = cmd_bootstrap(o);
        else if (o.subcommand == "efficiency") code = cmd_efficiency(o);
        else if (o.subcommand == "synth") code = cmd_synth(o);
        write_run_manifest(o);
        return code;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation_failure;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation_failure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation_failure;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return validation_failure;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace lesann::cli
