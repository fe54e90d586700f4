#include "cli_detail.hpp"

#include "lesann/efficiency.hpp"
#include "lesann/error.hpp"
#include "lesann/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace lesann::cli::detail {

namespace fs = std::filesystem;

namespace {

Volume ensemble_volume(const ManifestCase& c) {
    if (c.record.volume_paths.empty()) throw ValidationError("case lists no confidence volumes");
    std::vector<Volume> maps;
    for (const auto& p : c.record.volume_paths) maps.push_back(read_volume(p));
    return ensemble_average(maps);
}

std::vector<LesionCandidate> case_candidates(const ManifestCase& c, const Options& o) {
    return extract_candidates(ensemble_volume(c), o.annotate.method, o.annotate.extraction, o.annotate.static_threshold);
}

LabelVolume case_gt(const ManifestCase& c) {
    if (!c.record.gt_path) throw ValidationError("case has no gt_path");
    return read_label_volume(*c.record.gt_path);
}

// n_sig from the override or the report; nullopt when neither yields one.
std::optional<int> case_n_sig(const ManifestCase& c, const Options& o) {
    if (c.record.n_sig_override) return c.record.n_sig_override;
    const auto text = report_text(c);
    if (!text) return std::nullopt;
    const auto e = extract(Report{c.record.case_id, *text}, o.annotate.language);
    if (e.status == ExtractionStatus::empty) return std::nullopt;
    return e.n_sig;
}

// Writes the per-case lines, reports failures on stderr and picks the exit code.
int finish_cases(const std::vector<ManifestCase>& cases, std::vector<Json>& lines,
                 const std::vector<std::string>& errors, const fs::path& path) {
    int failed = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (errors[i].empty()) continue;
        lines[i] = failure_line(cases[i].record.case_id, errors[i]);
        std::cerr << "case " << cases[i].record.case_id << " failed: " << errors[i] << '\n';
        ++failed;
    }
    write_jsonl(path, lines);
    return failed ? partial_failure : ok;
}

struct CsvRow {
    int line = 0;
    std::vector<std::string> fields;
};

std::vector<CsvRow> read_csv(const fs::path& path, std::size_t columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<CsvRow> rows;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        CsvRow row{n, {}};
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            const auto b = field.find_first_not_of(" \t");
            const auto e = field.find_last_not_of(" \t");
            row.fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
        }
        if (row.fields.size() != columns)
            throw ValidationError(path.filename().string() + " line " + std::to_string(n) + ": expected " +
                                  std::to_string(columns) + " columns");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<double> parse_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// A first row whose numeric column does not parse is taken as a header.
double csv_number(const CsvRow& row, std::size_t col, bool& header_ok) {
    auto v = parse_number(row.fields[col]);
    if (!v) {
        if (header_ok) {
            header_ok = false;
            return std::nan("");
        }
        throw ValidationError("line " + std::to_string(row.line) + ": '" + row.fields[col] + "' is not a number");
    }
    header_ok = false;
    if (!std::isfinite(*v)) throw ValidationError("line " + std::to_string(row.line) + ": non-finite value");
    return *v;
}

Json froc_summary(const std::vector<MatchedCase>& matched, const Options& o) {
    const auto curve = froc_from_matches(matched);
    const auto all = froc_point_at(matched, 0.0);
    Json at = Json::array();
    for (double fp : o.fp_points) at.push_back({{"fp_per_case", fp}, {"sensitivity", sensitivity_at_fp(curve, fp)}});
    return Json{{"sensitivity", all.sensitivity},
                {"fp_per_case", all.fp_per_case},
                {"pauc", pauc(curve, o.pauc_lo, o.pauc_hi)},
                {"operating_points", at},
                {"froc", to_json(curve)}};
}

} // namespace

int cmd_parse_reports(const Options& o) {
    const auto cases = load_manifest(o.manifest);
    std::vector<Json> lines(cases.size());
    std::vector<std::optional<int>> predicted(cases.size());
    const auto errors = for_each_case(cases.size(), o.jobs, [&](std::size_t i) {
        const auto& c = cases[i];
        const auto text = report_text(c);
        const auto e = text ? extract(Report{c.record.case_id, *text}, o.annotate.language) : ReportExtraction{};
        Json j{{"case_id", c.record.case_id}};
        j.update(to_json(e));
        if (c.truth_n_sig) j["truth_n_sig"] = *c.truth_n_sig;
        lines[i] = std::move(j);
        predicted[i] = e.n_sig;
    });

    std::vector<int> pred, truth;
    for (std::size_t i = 0; i < cases.size(); ++i)
        if (errors[i].empty() && cases[i].truth_n_sig) {
            pred.push_back(*predicted[i]);
            truth.push_back(*cases[i].truth_n_sig);
        }
    if (!truth.empty()) {
        const auto m = evaluate_counts(pred, truth);
        write_json(o.out / "confusion.json", to_json(m));
        write_text(o.out / "confusion.txt", confusion_table(m));
    }
    return finish_cases(cases, lines, errors, o.out / "reports.jsonl");
}

int cmd_extract(const Options& o) {
    const auto cases = load_manifest(o.manifest);
    std::vector<Json> lines(cases.size());
    const auto errors = for_each_case(cases.size(), o.jobs, [&](std::size_t i) {
        const auto conf = ensemble_volume(cases[i]);
        const auto cand = extract_candidates(conf, o.annotate.method, o.annotate.extraction, o.annotate.static_threshold);
        Json list = Json::array();
        for (const auto& c : cand) list.push_back(to_json(c));
        Json j{{"case_id", cases[i].record.case_id}, {"method", o.method}};
        if (o.annotate.method == ExtractionMethod::otsu) j["threshold"] = otsu_threshold(conf);
        if (o.annotate.method == ExtractionMethod::static_threshold) j["threshold"] = o.static_threshold;
        j["candidates"] = std::move(list);
        lines[i] = std::move(j);
    });
    return finish_cases(cases, lines, errors, o.out / "candidates.jsonl");
}

int cmd_annotate(const Options& o) {
    const auto cases = load_manifest(o.manifest);
    std::vector<Json> lines(cases.size());
    const auto errors = for_each_case(cases.size(), o.jobs, [&](std::size_t i) {
        CaseRecord record = cases[i].record;
        if (!record.n_sig_override) record.report_text = report_text(cases[i]);
        const auto outcome = annotate_case(record, o.annotate);
        Json j = to_json(outcome);
        if (outcome.mask) {
            const fs::path rel = fs::path("masks") / record.case_id;
            write_label_volume(*outcome.mask, o.out / rel);
            j["mask_path"] = (rel.string() + ".json");
        } else {
            j["mask_path"] = nullptr;
        }
        lines[i] = std::move(j);
    });
    int counts[3] = {0, 0, 0};
    for (const auto& l : lines)
        if (l.contains("status") && l["status"] != "failed") {
            const auto s = l["status"].get<std::string>();
            ++counts[s == "annotated" ? 0 : s == "negative" ? 1 : 2];
        }
    std::cerr << counts[0] << " annotated, " << counts[1] << " negative, " << counts[2] << " excluded\n";
    return finish_cases(cases, lines, errors, o.out / "outcomes.jsonl");
}

int cmd_eval_localisation(const Options& o) {
    const auto cases = load_manifest(o.manifest);
    std::vector<Json> lines(cases.size());
    std::vector<MatchedCase> unfiltered(cases.size()), filtered(cases.size());
    const auto errors = for_each_case(cases.size(), o.jobs, [&](std::size_t i) {
        const auto& c = cases[i];
        auto cand = case_candidates(c, o);
        const auto n_sig = case_n_sig(c, o);
        EvalCase all{cand, case_gt(c)};
        EvalCase kept{report_mask(cand, n_sig.value_or(0), o.annotate.extraction.ranking), all.gt};
        unfiltered[i] = match_case(all, o.match);
        filtered[i] = match_case(kept, o.match);
        lines[i] = Json{{"case_id", c.record.case_id},
                        {"n_sig", n_sig ? Json(*n_sig) : Json(nullptr)},
                        {"gt_lesions", unfiltered[i].gt_lesions},
                        {"candidates", all.candidates.size()},
                        {"kept", kept.candidates.size()},
                        {"hits_unfiltered", unfiltered[i].hit_confidences.size()},
                        {"fp_unfiltered", unfiltered[i].fp_confidences.size()},
                        {"hits_filtered", filtered[i].hit_confidences.size()},
                        {"fp_filtered", filtered[i].fp_confidences.size()}};
    });
    const int code = finish_cases(cases, lines, errors, o.out / "localisation_cases.jsonl");

    std::vector<MatchedCase> u, f;
    for (std::size_t i = 0; i < cases.size(); ++i)
        if (errors[i].empty()) {
            u.push_back(unfiltered[i]);
            f.push_back(filtered[i]);
        }
    if (u.empty()) throw ValidationError("no case could be evaluated");

    // Both pipelines counted at every confidence level the unfiltered one produces.
    std::set<double, std::greater<>> thresholds;
    for (const auto& m : u) {
        thresholds.insert(m.hit_confidences.begin(), m.hit_confidences.end());
        thresholds.insert(m.fp_confidences.begin(), m.fp_confidences.end());
    }
    Json comparison = Json::array();
    for (double t : thresholds) {
        const auto a = froc_point_at(u, t);
        const auto b = froc_point_at(f, t);
        comparison.push_back({{"threshold", t},
                              {"fp_per_case_unfiltered", a.fp_per_case},
                              {"fp_per_case_filtered", b.fp_per_case},
                              {"sensitivity_unfiltered", a.sensitivity},
                              {"sensitivity_filtered", b.sensitivity}});
    }

    int total_gt = 0;
    for (const auto& m : u) total_gt += m.gt_lesions;
    const Json result{{"cases", u.size()},
                      {"failed", cases.size() - u.size()},
                      {"gt_lesions", total_gt},
                      {"unfiltered", froc_summary(u, o)},
                      {"filtered", froc_summary(f, o)},
                      {"comparison", comparison}};
    write_json(o.out / "localisation.json", result);
    write_text(o.out / "froc_unfiltered.csv", to_csv(froc_from_matches(u)));
    write_text(o.out / "froc_filtered.csv", to_csv(froc_from_matches(f)));
    return code;
}

int cmd_eval_detection(const Options& o) {
    const auto cases = load_manifest(o.manifest);
    std::vector<Json> lines(cases.size());
    std::vector<EvalCase> evals(cases.size());
    const auto errors = for_each_case(cases.size(), o.jobs, [&](std::size_t i) {
        evals[i] = EvalCase{case_candidates(cases[i], o), case_gt(cases[i])};
        lines[i] = Json{{"case_id", cases[i].record.case_id},
                        {"label", evals[i].gt.num_labels() > 0 ? 1 : 0},
                        {"score", case_score(evals[i].candidates)},
                        {"gt_lesions", evals[i].gt.num_labels()},
                        {"candidates", evals[i].candidates.size()}};
    });
    const int code = finish_cases(cases, lines, errors, o.out / "detection_cases.jsonl");

    std::vector<EvalCase> ok_cases;
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < cases.size(); ++i)
        if (errors[i].empty()) {
            scores.push_back(case_score(evals[i].candidates));
            labels.push_back(evals[i].gt.num_labels() > 0 ? 1 : 0);
            ok_cases.push_back(std::move(evals[i]));
        }
    if (ok_cases.empty()) throw ValidationError("no case could be evaluated");

    const auto roc_curve = roc(scores, labels);
    const auto froc_curve = froc(ok_cases, o.match);
    Json spec = Json::array();
    for (double s : o.sensitivity_points)
        spec.push_back({{"sensitivity", s}, {"specificity", specificity_at_sensitivity(roc_curve, s)}});
    Json sens = Json::array();
    for (double fp : o.fp_points) sens.push_back({{"fp_per_case", fp}, {"sensitivity", sensitivity_at_fp(froc_curve, fp)}});

    const auto d = dsc_report(ok_cases, o.match, o.include_missed);
    std::vector<std::string> ok_ids; // per_lesion case_index counts evaluated cases only
    for (std::size_t i = 0; i < cases.size(); ++i)
        if (errors[i].empty()) ok_ids.push_back(cases[i].record.case_id);
    Json per_lesion = Json::array();
    for (const auto& l : d.per_lesion)
        per_lesion.push_back({{"case_id", ok_ids[static_cast<std::size_t>(l.case_index)]}, {"gt_label", l.gt_label},
                              {"volume_cm3", l.volume_cm3}, {"dsc", l.dsc ? Json(*l.dsc) : Json(nullptr)}});

    const Json result{{"cases", ok_cases.size()},
                      {"failed", cases.size() - ok_cases.size()},
                      {"positives", std::count(labels.begin(), labels.end(), 1)},
                      {"auroc", auroc(scores, labels)},
                      {"pauc", pauc(froc_curve, o.pauc_lo, o.pauc_hi)},
                      {"pauc_interval", {o.pauc_lo, o.pauc_hi}},
                      {"sensitivity_at_fp", sens},
                      {"specificity_at_sensitivity", spec},
                      {"dsc",
                       {{"mean", d.mean ? Json(*d.mean) : Json(nullptr)},
                        {"std", d.std_dev ? Json(*d.std_dev) : Json(nullptr)},
                        {"lesions", d.lesions},
                        {"matched", d.matched},
                        {"include_missed", o.include_missed},
                        {"per_lesion", per_lesion}}},
                      {"roc", to_json(roc_curve)},
                      {"froc", to_json(froc_curve)}};
    write_json(o.out / "detection.json", result);
    write_text(o.out / "roc.csv", to_csv(roc_curve));
    write_text(o.out / "froc.csv", to_csv(froc_curve));
    return code;
}

int cmd_permtest(const Options& o) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> groups;
    bool header_ok = true;
    for (const auto& row : read_csv(o.input, 2)) {
        const double v = csv_number(row, 1, header_ok);
        if (std::isnan(v)) continue;
        if (!groups.count(row.fields[0])) order.push_back(row.fields[0]);
        groups[row.fields[0]].push_back(v);
    }
    std::string a = o.group_a, b = o.group_b;
    if (a.empty() || b.empty()) {
        if (order.size() != 2) throw ValidationError("input has " + std::to_string(order.size()) +
                                                     " groups; name the compared ones with --group-a/--group-b");
        if (a.empty()) a = order[0] == b ? order[1] : order[0];
        if (b.empty()) b = order[0] == a ? order[1] : order[0];
    }
    for (const auto& g : {a, b})
        if (!groups.count(g)) throw ValidationError("group '" + g + "' not found in input");
    if (a == b) throw ValidationError("the two groups must differ");

    const auto r = permutation_test(RunGroup{a, groups[a]}, RunGroup{b, groups[b]}, o.iterations, o.seed);
    Json j = to_json(r, {a, b});
    j["n"] = {groups[a].size(), groups[b].size()};
    j["alpha"] = kSignificanceLevel;
    write_json(o.out / "permtest.json", j);
    return ok;
}

int cmd_bootstrap(const Options& o) {
    std::vector<double> values;
    std::vector<int> labels;
    bool header_ok = true;
    for (const auto& row : read_csv(o.input, 2)) {
        const double v = csv_number(row, 0, header_ok);
        if (std::isnan(v)) continue;
        const auto l = parse_number(row.fields[1]);
        if (!l || (*l != 0.0 && *l != 1.0))
            throw ValidationError("line " + std::to_string(row.line) + ": label must be 0 or 1");
        values.push_back(v);
        labels.push_back(static_cast<int>(*l));
    }
    const auto r = bootstrap_ci(values, labels, bootstrap_metric(o.metric), o.iterations, o.seed);
    Json j{{"metric", o.metric}};
    j.update(to_json(r));
    j["cases"] = values.size();
    write_json(o.out / "bootstrap.json", j);
    return ok;
}

int cmd_efficiency(const Options& o) {
    if (!std::isfinite(o.target)) throw ValidationError("efficiency needs --target");
    std::vector<BudgetPoint> raw;
    bool header_ok = true;
    for (const auto& row : read_csv(o.input, 2)) {
        const double n = csv_number(row, 0, header_ok);
        if (std::isnan(n)) continue;
        const auto perf = parse_number(row.fields[1]);
        if (!perf) throw ValidationError("line " + std::to_string(row.line) + ": performance is not a number");
        raw.push_back({n, *perf});
    }
    const auto points = average_by_budget(raw);
    const auto req = required_annotations(points, o.target);
    if (req.ambiguous)
        std::cerr << "warning: performance is not monotone; several budget brackets contain the target, using the lowest\n";

    Json pts = Json::array();
    for (const auto& p : points) pts.push_back({{"n_manual", p.n_manual}, {"performance", p.performance}});
    Json j{{"target", o.target},
           {"points", pts},
           {"n_semi", req.n_semi},
           {"bracket", {points[req.bracket].n_manual, points[req.bracket + 1].n_manual}},
           {"ambiguous", req.ambiguous}};
    j["n_supervised"] = std::isfinite(o.n_supervised) ? Json(o.n_supervised) : Json(nullptr);
    j["ratio"] = std::isfinite(o.n_supervised) ? Json(efficiency_ratio(o.n_supervised, req.n_semi)) : Json(nullptr);
    write_json(o.out / "efficiency.json", j);

    std::string csv = "n_manual,performance\n";
    for (const auto& s : interpolation_samples(points, o.samples))
        csv += format_double(s.n_manual) + ',' + format_double(s.performance) + '\n';
    write_text(o.out / "efficiency_curve.csv", csv);
    return ok;
}

int cmd_synth(const Options& o) {
    const auto n = static_cast<std::size_t>(o.cases);
    std::vector<Json> manifest(n), truth(n);
    const auto errors = for_each_case(n, o.jobs, [&](std::size_t i) {
        const auto sc = generate_case(o.scenario, o.seed, static_cast<int>(i));
        Json volumes = Json::array();
        for (std::size_t m = 0; m < sc.members.size(); ++m) {
            const std::string rel = "volumes/" + sc.case_id + "_m" + std::to_string(m);
            write_volume(sc.members[m], o.out / rel);
            volumes.push_back(rel + ".json");
        }
        const std::string gt_rel = "gt/" + sc.case_id;
        write_label_volume(sc.gt, o.out / gt_rel);
        const std::string report_rel = "reports/" + sc.case_id + ".txt";
        write_text(o.out / report_rel, sc.report.body);

        manifest[i] = Json{{"case_id", sc.case_id},
                           {"volume_paths", volumes},
                           {"report_path", report_rel},
                           {"gt_path", gt_rel + ".json"},
                           {"truth_n_sig", sc.true_n_sig}};
        Json lesions = Json::array();
        for (const auto& l : sc.lesions)
            lesions.push_back({{"center", l.center}, {"sigma_mm", l.sigma_mm}, {"amplitude", l.amplitude}});
        truth[i] = Json{{"case_id", sc.case_id},
                        {"variant", to_string(sc.variant)},
                        {"true_n_sig", sc.true_n_sig},
                        {"significant_lesions", sc.significant_lesions},
                        {"lesions", lesions}};
    });
    for (std::size_t i = 0; i < n; ++i)
        if (!errors[i].empty()) throw Error("synthetic case " + std::to_string(i) + ": " + errors[i]);
    write_jsonl(o.out / "manifest.jsonl", manifest);
    write_jsonl(o.out / "truth.jsonl", truth);
    return ok;
}

CaseScenario scenario_from_json(const Json& j) {
    CaseScenario s;
    static const std::set<std::string> known{
        "cases", "dims", "spacing_mm", "max_significant", "max_fp_blobs", "negative_fraction",
        "significant_amplitude", "fp_amplitude", "sigma_xy_mm", "sigma_z_mm", "background_level",
        "ensemble_members", "noise_sigma", "report_fp_probability", "variants", "unparseable_fraction",
        "min_separation"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ValidationError("unknown scenario key '" + key + "'");
    try {
        if (j.contains("dims")) {
            const auto d = j["dims"].get<std::array<std::int64_t, 3>>();
            s.dims = {d[0], d[1], d[2]};
        }
        if (j.contains("spacing_mm")) {
            const auto sp = j["spacing_mm"].get<std::array<double, 3>>();
            s.spacing = {sp[0], sp[1], sp[2]};
        }
        s.max_significant = j.value("max_significant", s.max_significant);
        s.max_fp_blobs = j.value("max_fp_blobs", s.max_fp_blobs);
        s.negative_fraction = j.value("negative_fraction", s.negative_fraction);
        if (j.contains("significant_amplitude")) {
            const auto r = j["significant_amplitude"].get<std::array<double, 2>>();
            s.significant_amplitude_min = r[0];
            s.significant_amplitude_max = r[1];
        }
        if (j.contains("fp_amplitude")) {
            const auto r = j["fp_amplitude"].get<std::array<double, 2>>();
            s.fp_amplitude_min = r[0];
            s.fp_amplitude_max = r[1];
        }
        s.sigma_xy_mm = j.value("sigma_xy_mm", s.sigma_xy_mm);
        s.sigma_z_mm = j.value("sigma_z_mm", s.sigma_z_mm);
        s.background_level = j.value("background_level", s.background_level);
        s.ensemble_members = j.value("ensemble_members", s.ensemble_members);
        s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
        s.report_fp_probability = j.value("report_fp_probability", s.report_fp_probability);
        if (j.contains("variants")) {
            s.variants.clear();
            for (const auto& v : j["variants"]) s.variants.push_back(report_variant_from_string(v.get<std::string>()));
        }
        s.unparseable_fraction = j.value("unparseable_fraction", s.unparseable_fraction);
        s.min_separation = j.value("min_separation", s.min_separation);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("scenario: ") + e.what());
    }
    return s;
}

Json scenario_to_json(const CaseScenario& s) {
    Json variants = Json::array();
    for (auto v : s.variants) variants.push_back(to_string(v));
    return Json{{"dims", {s.dims.nx, s.dims.ny, s.dims.nz}},
                {"spacing_mm", {s.spacing.sx, s.spacing.sy, s.spacing.sz}},
                {"max_significant", s.max_significant},
                {"max_fp_blobs", s.max_fp_blobs},
                {"negative_fraction", s.negative_fraction},
                {"significant_amplitude", {s.significant_amplitude_min, s.significant_amplitude_max}},
                {"fp_amplitude", {s.fp_amplitude_min, s.fp_amplitude_max}},
                {"sigma_xy_mm", s.sigma_xy_mm},
                {"sigma_z_mm", s.sigma_z_mm},
                {"background_level", s.background_level},
                {"ensemble_members", s.ensemble_members},
                {"noise_sigma", s.noise_sigma},
                {"report_fp_probability", s.report_fp_probability},
                {"variants", variants},
                {"unparseable_fraction", s.unparseable_fraction},
                {"min_separation", s.min_separation}};
}

} // namespace lesann::cli::detail
