#include "helpers.hpp"

#include "lesann/cli.hpp"
#include "lesann/error.hpp"
#include "lesann/serialize.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace lesann;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<Json> jsonl(const fs::path& p) {
    std::vector<Json> out;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(Json::parse(line));
    return out;
}

int run(std::vector<std::string> args) { return cli::run(args); }

} // namespace

TEST_SUITE("cli") {

TEST_CASE("parse-reports on two printed report sections") {
    testing::TempDir dir("cli_parse");
    std::ofstream(dir / "m.jsonl")
        << R"({"case_id":"left","report":"Index lesion mark1: peripheral zone right apex. T2W/DWI/DCE score: 4/4/+. Minimal ADC value: 821 (normally at least 950). Risk category: intermediate/high-grade cancer (PI-RADS v2 category: 4).","truth_n_sig":1})"
        << "\n"
        << R"({"case_id":"right","report":"Finding nr. 1: peripheral zone right posterior mid-base prostate. Score T2W: 5, Score DCE: +, Score DWI: 5, minimal ADC value 665. Lesion best fits significant prostate cancer (PIRADS 5).","truth_n_sig":1})"
        << "\n";
    REQUIRE(run({"parse-reports", "--manifest", (dir / "m.jsonl").string(), "--out", (dir / "out").string()}) == 0);
    const auto lines = jsonl(dir / "out/reports.jsonl");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0]["n_sig"] == 1);
    CHECK(lines[1]["n_sig"] == 1);
    CHECK(lines[0]["findings"][0]["pirads"] == 4);
    CHECK(lines[1]["findings"][0]["dwi"] == 5);
    CHECK(lines[1]["findings"][0]["dce"] == "+");
    const auto conf = Json::parse(slurp(dir / "out/confusion.json"));
    CHECK(conf["accuracy"] == 1.0);
    CHECK(fs::exists(dir / "out/confusion.txt"));
    const auto run_json = Json::parse(slurp(dir / "out/run.json"));
    CHECK(run_json["tool"] == "lesann");
    CHECK(run_json["subcommand"] == "parse-reports");
    CHECK(run_json["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("empty manifest, unknown subcommand and bad flags exit 1") {
    testing::TempDir dir("cli_errors");
    std::ofstream(dir / "empty.jsonl") << "\n";
    CHECK(run({"annotate", "--manifest", (dir / "empty.jsonl").string(), "--out", (dir / "o").string()}) == 1);
    CHECK(run({"frobnicate"}) == 1);
    CHECK(run({"annotate", "--bogus"}) == 1);
    std::ofstream(dir / "dup.jsonl") << R"({"case_id":"a"})" << "\n" << R"({"case_id":"a"})" << "\n";
    CHECK(run({"parse-reports", "--manifest", (dir / "dup.jsonl").string(), "--out", (dir / "o").string()}) == 1);
    std::ofstream(dir / "broken.jsonl") << "{not json\n";
    CHECK(run({"parse-reports", "--manifest", (dir / "broken.jsonl").string(), "--out", (dir / "o").string()}) == 1);
    CHECK_THROWS_AS(cli::load_manifest(dir / "empty.jsonl"), ValidationError);
    CHECK(run({"extract", "--manifest", (dir / "dup.jsonl").string(), "--out", (dir / "o").string(), "--connectivity", "8"}) == 1);
}

TEST_CASE("per-case failures do not abort the batch") {
    testing::TempDir dir("cli_partial");
    write_volume(Volume::filled({8, 8, 4}, {1, 1, 1}, 0.05f), dir / "ok");
    std::ofstream(dir / "m.jsonl") << R"({"case_id":"good","volume_paths":["ok.json"],"report":"Laesie 1: PI-RADS 2."})" << "\n"
                                   << R"({"case_id":"bad","volume_paths":["missing.json"],"report":"Laesie 1: PI-RADS 2."})" << "\n";
    CHECK(run({"annotate", "--manifest", (dir / "m.jsonl").string(), "--out", (dir / "out").string()}) == 2);
    const auto lines = jsonl(dir / "out/outcomes.jsonl");
    REQUIRE(lines.size() == 2);
    CHECK(lines[0]["status"] == "negative");
    CHECK(lines[1]["status"] == "failed");
    CHECK(fs::exists(dir / "out/masks/good.json"));
}

TEST_CASE("config precedence: flags over config over defaults") {
    testing::TempDir dir("cli_config");
    std::ofstream(dir / "m.jsonl") << R"({"case_id":"a","report":"x"})" << "\n";
    std::ofstream(dir / "cfg.json") << R"({"max_lesions":3,"min_peak":0.2})";
    REQUIRE(run({"parse-reports", "--manifest", (dir / "m.jsonl").string(), "--out", (dir / "out").string(), "--config",
                 (dir / "cfg.json").string()}) == 0);
    auto cfg = Json::parse(slurp(dir / "out/run.json"))["config"];
    CHECK(cfg["max_lesions"] == 3);
    CHECK(cfg["min_peak"] == 0.2);
    CHECK(cfg["rel_threshold"] == 0.4);
    write_volume(Volume::filled({4, 4, 4}, {1, 1, 1}), dir / "v");
    std::ofstream(dir / "m2.jsonl") << R"({"case_id":"a","volume_paths":["v.json"]})" << "\n";
    REQUIRE(run({"extract", "--manifest", (dir / "m2.jsonl").string(), "--out", (dir / "out2").string(), "--config",
                 (dir / "cfg.json").string(), "--max-lesions", "4"}) == 0);
    cfg = Json::parse(slurp(dir / "out2/run.json"))["config"];
    CHECK(cfg["max_lesions"] == 4);
    CHECK(cfg["min_peak"] == 0.2);
    std::ofstream(dir / "bad.json") << R"({"max_lesion":3})";
    CHECK(run({"parse-reports", "--manifest", (dir / "m.jsonl").string(), "--out", (dir / "out").string(), "--config",
               (dir / "bad.json").string()}) == 1);
}

TEST_CASE("synth, annotate, evaluate") {
    testing::TempDir dir("cli_pipeline");
    std::ofstream(dir / "scenario.json") << R"({"dims":[40,40,12],"cases":12,"negative_fraction":0.4})";
    const auto data = (dir / "data").string();
    REQUIRE(run({"synth", "--scenario", (dir / "scenario.json").string(), "--seed", "3", "--out", data, "--jobs", "2"}) == 0);
    const auto manifest = (dir / "data/manifest.jsonl").string();
    CHECK(cli::load_manifest(manifest).size() == 12);

    REQUIRE(run({"parse-reports", "--manifest", manifest, "--out", (dir / "p").string()}) == 0);
    CHECK(Json::parse(slurp(dir / "p/confusion.json"))["accuracy"] == 1.0);

    REQUIRE(run({"annotate", "--manifest", manifest, "--out", (dir / "a").string(), "--jobs", "3"}) == 0);
    CHECK(jsonl(dir / "a/outcomes.jsonl").size() == 12);

    REQUIRE(run({"eval-localisation", "--manifest", manifest, "--out", (dir / "l").string()}) == 0);
    const auto loc = Json::parse(slurp(dir / "l/localisation.json"));
    for (const auto& row : loc["comparison"]) {
        CHECK(row["fp_per_case_filtered"].get<double>() <= row["fp_per_case_unfiltered"].get<double>());
    }
    CHECK(slurp(dir / "l/froc_filtered.csv").rfind("threshold,fp_per_case,sensitivity\n", 0) == 0);

    REQUIRE(run({"eval-detection", "--manifest", manifest, "--out", (dir / "d").string(), "--include-missed"}) == 0);
    const auto det = Json::parse(slurp(dir / "d/detection.json"));
    CHECK(det["auroc"].get<double>() >= 0.0);
    CHECK(fs::exists(dir / "d/roc.csv"));

    for (const char* method : {"dynamic-fast", "static", "otsu"})
        CHECK(run({"extract", "--manifest", manifest, "--out", (dir / "e").string(), "--method", method}) == 0);
}

TEST_CASE("statistics subcommands") {
    testing::TempDir dir("cli_stats");
    {
        std::ofstream f(dir / "runs.csv");
        f << "group,value\n";
        for (int i = 0; i < 5; ++i) f << "semi," << 0.8 + 0.01 * i << "\nsup," << 0.7 + 0.01 * i << "\n";
    }
    REQUIRE(run({"permtest", "--input", (dir / "runs.csv").string(), "--out", (dir / "p").string(), "--iterations", "999", "--seed", "1"}) == 0);
    const auto p = Json::parse(slurp(dir / "p/permtest.json"));
    CHECK(p["p"] == doctest::Approx(1.0 / 1000));
    CHECK(p["groups"][0] == "semi");

    {
        std::ofstream f(dir / "scores.csv");
        f << "score,label\n0.9,1\n0.8,1\n0.3,0\n0.4,0\n0.7,1\n0.2,0\n";
    }
    REQUIRE(run({"bootstrap", "--input", (dir / "scores.csv").string(), "--out", (dir / "b").string(), "--iterations", "200"}) == 0);
    const auto b = Json::parse(slurp(dir / "b/bootstrap.json"));
    CHECK(b["point"] == 1.0);

    {
        std::ofstream f(dir / "budget.csv");
        f << "n_manual,performance\n100,0.70\n300,0.80\n";
    }
    REQUIRE(run({"efficiency", "--input", (dir / "budget.csv").string(), "--out", (dir / "e").string(), "--target",
                 "0.75", "--n-supervised", "300"}) == 0);
    const auto e = Json::parse(slurp(dir / "e/efficiency.json"));
    CHECK(e["n_semi"].get<double>() == doctest::Approx(173.205).epsilon(1e-4));
    CHECK(e["ratio"].get<double>() == doctest::Approx(1.732).epsilon(1e-3));
    CHECK(run({"efficiency", "--input", (dir / "budget.csv").string(), "--out", (dir / "e").string()}) == 1);
    CHECK(run({"efficiency", "--input", (dir / "budget.csv").string(), "--out", (dir / "e").string(), "--target", "0.95"}) == 1);
}

}
