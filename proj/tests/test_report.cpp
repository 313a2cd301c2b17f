#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "confscale/harness.hpp"
#include "confscale/report.hpp"
#include "confscale/synth.hpp"

using namespace confscale;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "confscale_report_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Writes an artifact directly from (confidence, correct) pairs.
fs::path write_artifact(const fs::path& dir, const std::string& scale_label,
                        const std::vector<std::pair<int, bool>>& rows) {
  fs::create_directories(dir);
  const fs::path path = dir / (scale_label + ".jsonl");
  std::ofstream out(path, std::ios::binary);
  std::size_t i = 0;
  for (const auto& [conf, correct] : rows) {
    ResponseRecord r;
    r.task_id = "t" + std::to_string(i++);
    r.scale_label = scale_label;
    r.prompt_text = "p";
    r.raw_output = "Answer: A\nConfidence: " + std::to_string(conf);
    r.status = "ok";
    r.confidence = conf;
    r.correct = correct ? 1 : 0;
    r.timestamp = "1970-01-01T00:00:00Z";
    out << record_to_jsonl(r) << '\n';
  }
  return path;
}

std::vector<std::pair<int, bool>> simple_cell(int high_conf, int low_conf) {
  std::vector<std::pair<int, bool>> rows;
  for (int i = 0; i < 60; ++i) rows.push_back({high_conf, i % 5 != 0});  // 48/60 correct
  for (int i = 0; i < 40; ++i) rows.push_back({low_conf, i % 10 < 3});   // 12/40 correct
  return rows;
}

fs::path simulate_artifact(const fs::path& model_dir, const ScaleSpec& scale,
                           const SynthParams& params, std::size_t n) {
  RunConfig config;
  config.dataset_name = "synthetic";
  config.output_dir = model_dir;
  config.fixed_timestamp = "1970-01-01T00:00:00Z";
  const auto tasks = make_synth_tasks(n);
  SyntheticAdapter adapter(tasks, scale, params);
  return run_condition(config, tasks, scale, adapter).artifact;
}

}  // namespace

TEST_CASE("baseline report sorts models by M_ratio and renders top-1 cells") {
  const fs::path root = fresh_dir("baseline");

  // sharp: confidence separates correct from incorrect; blunt: it does not.
  write_artifact(root / "sharp" / "syn", "[0,100]", simple_cell(95, 20));
  write_artifact(root / "blunt" / "syn", "[0,100]", simple_cell(60, 55));

  const auto refs = discover_artifacts(root);
  REQUIRE(refs.size() == 2);

  const std::string md = emit_report(refs, ReportMode::Baseline, DocFormat::Markdown);
  CHECK(md.find("| Model |") != std::string::npos);
  CHECK(md.find("95 (60.0%)") != std::string::npos);
  const auto sharp_pos = md.find("sharp");
  const auto blunt_pos = md.find("blunt");
  REQUIRE(sharp_pos != std::string::npos);
  REQUIRE(blunt_pos != std::string::npos);
  CHECK(sharp_pos < blunt_pos);  // higher M_ratio first

  SUBCASE("reports are byte-deterministic") {
    CHECK(emit_report(refs, ReportMode::Baseline, DocFormat::Markdown) == md);
  }

  SUBCASE("csv quotes cells containing commas") {
    const std::string csv = emit_report(refs, ReportMode::Baseline, DocFormat::Csv);
    CHECK(csv.find("Model,Top-1") == 0);
    CHECK(csv.find('|') == std::string::npos);
  }

  SUBCASE("empty artifact list reports the missing condition") {
    CHECK_THROWS_AS(emit_report({}, ReportMode::Baseline, DocFormat::Markdown),
                    MissingCondition);
  }

  SUBCASE("a model without the required condition reports it by label") {
    const fs::path partial_root = fresh_dir("baseline_partial");
    write_artifact(partial_root / "m" / "syn", "[0,20]", simple_cell(19, 4));
    try {
      emit_report(discover_artifacts(partial_root), ReportMode::Baseline, DocFormat::Markdown);
      FAIL("expected MissingCondition");
    } catch (const MissingCondition& e) {
      CHECK(e.label == "[0,100]");
    }
  }
}

TEST_CASE("granularity report bolds the best M_ratio per row") {
  const fs::path root = fresh_dir("granularity");
  const fs::path model_dir = root / "observer";
  SynthParams params;
  params.criteria = uniform_criteria(10, 0.2, 1.8);
  params.seed = 4;
  for (const char* label : {"[0,5]", "[0,10]", "[0,20]", "[0,50]", "[0,100]"}) {
    simulate_artifact(model_dir, resolve_scale_label(label), params, 400);
  }
  const auto refs = discover_artifacts(root);
  REQUIRE(refs.size() == 5);

  const std::string md = emit_report(refs, ReportMode::Granularity, DocFormat::Markdown);
  CHECK(md.find("meta-d' [0,5]") != std::string::npos);
  CHECK(md.find("M_ratio [0,100]") != std::string::npos);
  CHECK(md.find("**") != std::string::npos);  // best-per-row highlight

  const std::string csv = emit_report(refs, ReportMode::Granularity, DocFormat::Csv);
  CHECK(csv.find("**") == std::string::npos);
  CHECK(csv.find("\"meta-d' [0,5]\"") != std::string::npos);  // commas force quotes
}

TEST_CASE("boundary and non-standard reports expose the diagnostic rows") {
  const fs::path root = fresh_dir("boundary");
  const fs::path model_dir = root / "observer";
  SynthParams params;
  params.criteria = uniform_criteria(10, 0.2, 1.8);
  params.anchor_prob = 0.5;
  params.seed = 6;
  for (const char* label : {"[0,100]", "[20,100]", "[40,100]", "[60,100]"}) {
    simulate_artifact(model_dir, resolve_scale_label(label), params, 400);
  }
  const auto refs = discover_artifacts(root);
  const std::string md = emit_report(refs, ReportMode::Boundary, DocFormat::Markdown);
  CHECK(md.find("Util. (%)") != std::string::npos);
  CHECK(md.find("[60,100]") != std::string::npos);
  CHECK(md.find("meta-d'") != std::string::npos);

  SUBCASE("nonstandard-g2 requires its contrast scales") {
    try {
      emit_report(refs, ReportMode::NonStandardG2, DocFormat::Markdown);
      FAIL("expected MissingCondition");
    } catch (const MissingCondition& e) {
      CHECK(e.label == "[3,38]");
    }
  }
}

TEST_CASE("significance stars appear only with --stats style options") {
  const fs::path root = fresh_dir("stats_mode");
  const fs::path model_dir = root / "observer";
  // Strong contrast: informative confidence on [0,100], pure noise on [0,20].
  SynthParams sharp;
  sharp.criteria = uniform_criteria(10, 0.2, 1.8);
  sharp.seed = 8;
  simulate_artifact(model_dir, resolve_scale_label("[0,100]"), sharp, 600);
  SynthParams noisy = sharp;
  noisy.noise_sd = 25.0;  // confidence nearly uncoupled from correctness
  for (const char* label : {"[0,5]", "[0,10]", "[0,20]", "[0,50]"}) {
    simulate_artifact(model_dir, resolve_scale_label(label), noisy, 600);
  }
  const auto refs = discover_artifacts(root);

  ReportOptions plain;
  const std::string no_stars = emit_report(refs, ReportMode::Granularity, DocFormat::Csv, plain);
  CHECK(no_stars.find('*') == std::string::npos);

  ReportOptions with;
  with.with_stats = true;
  with.n_resamples = 300;
  with.seed = 5;
  const std::string starred = emit_report(refs, ReportMode::Granularity, DocFormat::Csv, with);
  CHECK(starred.find('*') != std::string::npos);
}

TEST_CASE("score_artifact emits the full metric record") {
  const fs::path root = fresh_dir("score");
  const fs::path path = write_artifact(root / "m" / "d", "[0,100]", simple_cell(95, 30));
  const ArtifactData data = load_artifact(path);
  ScoreOptions options;
  options.bootstrap_resamples = 200;
  const auto j = score_artifact(data, options);

  for (const char* key :
       {"scale", "n_parsed", "n_nonconforming", "top1_value", "top1_freq", "top3_cum",
        "unique_count", "entropy_bits", "round_pref", "violation_rate", "nonconformance_rate",
        "utilization", "accuracy", "auroc", "ece", "sdt", "bootstrap"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["sdt"].size() == 2);
  CHECK(j["sdt"][0]["threshold"] == 0.9);
  CHECK(j["sdt"][1]["threshold"] == 0.95);
  CHECK(j["ece"]["equal_width"].contains("10"));
  CHECK(j["ece"]["equal_mass"].contains("10"));
  CHECK(j["bootstrap"].size() == 4);
  for (const auto& ci : j["bootstrap"]) {
    CHECK(ci["lo"].get<double>() <= ci["hi"].get<double>());
  }
}

TEST_CASE("compare_artifacts serializes a permutation result") {
  const fs::path root = fresh_dir("compare");
  const fs::path pa = write_artifact(root / "a" / "d", "[0,100]", simple_cell(95, 20));
  std::vector<std::pair<int, bool>> noise_rows;
  for (int i = 0; i < 100; ++i) noise_rows.push_back({i % 2 == 0 ? 95 : 20, i % 3 == 0});
  const fs::path pb = write_artifact(root / "b" / "d", "[0,100]", noise_rows);

  const auto j = compare_artifacts(load_artifact(pa), load_artifact(pb), 0.9, 2000, 3, 2);
  for (const char* key : {"statistic", "point", "p_value", "p_adjusted", "seed", "n"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["point"].get<double>() > 0.0);  // informative beats noise
  CHECK(j["p_value"].get<double>() <= 1.0);
  CHECK(j["p_value"].get<double>() >= 1.0 / 2001.0);
  CHECK(j["p_adjusted"].get<double>() ==
        doctest::Approx(std::min(1.0, 2.0 * j["p_value"].get<double>())));
}

TEST_CASE("ece sweep renders one row per bin count with the B=10 gap") {
  const fs::path root = fresh_dir("sweep");

  SUBCASE("single-value artifacts have B-independent equal-width ece") {
    std::vector<std::pair<int, bool>> rows;
    for (int i = 0; i < 40; ++i) rows.push_back({95, i % 2 == 0});
    const fs::path path = write_artifact(root / "m" / "d", "[0,100]", rows);
    const ArtifactData data = load_artifact(path);
    const std::vector<int> bins{kBinSweep.begin(), kBinSweep.end()};
    const std::string csv = ece_sweep(data, bins, DocFormat::Csv);

    // All equal-width cells identical: |acc - 0.95| = 0.45.
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);  // header
    CHECK(line == "B,Equal-Width,Equal-Mass,|Delta|");
    std::size_t n_rows = 0;
    while (std::getline(lines, line)) {
      CHECK(line.find(",0.45,") != std::string::npos);
      ++n_rows;
    }
    CHECK(n_rows == bins.size());
    CHECK(csv.find("10,0.45,") != std::string::npos);
  }
}
