// confscale: measure the metacognitive quality of verbalized confidence
// under controlled confidence-scale designs.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "confscale/adapters.hpp"
#include "confscale/harness.hpp"
#include "confscale/metrics.hpp"
#include "confscale/report.hpp"
#include "confscale/scale.hpp"
#include "confscale/sdt.hpp"
#include "confscale/stats.hpp"
#include "confscale/synth.hpp"

namespace {

using namespace confscale;

void write_output(const std::string& document, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << document;
    if (!document.empty() && document.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write: " + out_path);
  out << document;
}

std::vector<ScaleSpec> resolve_scales(const std::vector<std::string>& labels) {
  std::vector<ScaleSpec> scales;
  if (labels.empty()) {
    return builtin_conditions();
  }
  for (const auto& label : labels) scales.push_back(resolve_scale_label(label));
  return scales;
}

struct SynthFlags {
  double d = 2.0;
  std::size_t criteria_count = 20;
  double criteria_lo = 0.1;
  double criteria_hi = 2.0;
  double anchor_prob = 0.0;
  double noise_sd = 0.0;

  SynthParams params(std::uint64_t seed) const {
    SynthParams p;
    p.d = d;
    p.criteria = uniform_criteria(criteria_count, criteria_lo, criteria_hi);
    p.anchor_prob = anchor_prob;
    p.noise_sd = noise_sd;
    p.seed = seed;
    return p;
  }
};

void add_synth_flags(CLI::App* cmd, SynthFlags& flags) {
  cmd->add_option("--d", flags.d, "Evidence sensitivity of the synthetic observer");
  cmd->add_option("--criteria-count", flags.criteria_count, "Number of confidence cutpoints");
  cmd->add_option("--criteria-lo", flags.criteria_lo, "Lowest cutpoint on |evidence|");
  cmd->add_option("--criteria-hi", flags.criteria_hi, "Highest cutpoint on |evidence|");
  cmd->add_option("--anchor-prob", flags.anchor_prob,
                  "Probability of snapping to the nearest multiple of 5");
  cmd->add_option("--noise-sd", flags.noise_sd, "Metacognitive noise sd");
}

std::unique_ptr<ModelAdapter> make_adapter(const std::string& descriptor,
                                           std::span<const TaskInstance> tasks,
                                           const ScaleSpec& scale, const SynthFlags& synth,
                                           std::uint64_t seed, const RemoteConfig& remote) {
  if (descriptor.rfind("replay:", 0) == 0) {
    return std::make_unique<ReplayAdapter>(descriptor.substr(7));
  }
  if (descriptor == "synthetic") {
    return std::make_unique<SyntheticAdapter>(
        std::vector<TaskInstance>(tasks.begin(), tasks.end()), scale, synth.params(seed));
  }
  if (descriptor == "remote") {
    if (remote.url.empty()) throw std::invalid_argument("remote adapter needs --url");
    return std::make_unique<RemoteAdapter>(remote);
  }
  throw std::invalid_argument("unknown adapter: " + descriptor +
                              " (expected replay:<fixture>, synthetic, remote)");
}

int run_validate();

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence-scale evaluation toolkit"};
  app.require_subcommand(1);

  // conditions
  auto* conditions_cmd = app.add_subcommand("conditions", "List the built-in scale conditions");
  std::string conditions_format = "json";
  conditions_cmd->add_option("--format", conditions_format, "json|md")
      ->check(CLI::IsMember({"json", "md"}));

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a condition sweep over a dataset");
  std::string config_path;
  RunConfig run_config;
  std::vector<std::string> run_scales;
  std::string run_dataset;
  std::string run_adapter = "synthetic";
  std::string run_out = "runs";
  std::uint64_t run_seed = 0;
  int run_parallel = 1;
  std::string run_fixed_ts;
  SynthFlags run_synth;
  RemoteConfig remote;
  run_cmd->add_option("--config", config_path, "JSON run config (flags override it)");
  run_cmd->add_option("--dataset", run_dataset, "Dataset JSONL path");
  // allow_extra_args(false): keeps CLI11 from exploding bracketed labels
  // like [0,20] into comma-separated pieces.
  run_cmd->add_option("--scale", run_scales, "Scale label(s), e.g. [0,20]; default all built-ins")
      ->allow_extra_args(false)
      ->take_all();
  run_cmd->add_option("--adapter", run_adapter, "replay:<fixture> | synthetic | remote");
  run_cmd->add_option("--seed", run_seed, "Seed for the synthetic adapter");
  run_cmd->add_option("--max-parallel", run_parallel, "Concurrent adapter calls");
  run_cmd->add_option("--out", run_out, "Output directory");
  run_cmd->add_option("--fixed-ts", run_fixed_ts,
                      "Pin record timestamps (byte-stable artifacts)");
  run_cmd->add_option("--url", remote.url, "Remote endpoint URL");
  run_cmd->add_option("--model-name", remote.model, "Remote model name");
  run_cmd->add_option("--auth-env", remote.auth_env, "Env var holding the bearer token");
  run_cmd->add_option("--timeout", remote.timeout_s, "Remote request timeout (s)");
  run_cmd->add_option("--retries", remote.max_retries, "Remote retry budget");
  add_synth_flags(run_cmd, run_synth);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic-observer artifact");
  std::vector<std::string> sim_scales = {"[0,100]"};
  std::size_t sim_n = 2000;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "runs/synthetic-observer";
  std::string sim_dataset_name = "synthetic";
  SynthFlags sim_synth;
  sim_cmd->add_option("--scale", sim_scales, "Scale label(s)")
      ->allow_extra_args(false)
      ->take_all();
  sim_cmd->add_option("--n", sim_n, "Number of trials");
  sim_cmd->add_option("--seed", sim_seed, "Seed");
  sim_cmd->add_option("--out", sim_out, "Output directory (the model directory)");
  sim_cmd->add_option("--dataset-name", sim_dataset_name, "Dataset directory name");
  add_synth_flags(sim_cmd, sim_synth);

  // score
  auto* score_cmd = app.add_subcommand("score", "Metrics + SDT + stats for artifacts");
  std::vector<std::string> score_artifacts;
  std::vector<double> score_thresholds;
  std::size_t score_bootstrap = 0;
  std::uint64_t score_seed = 0;
  bool score_compare = false;
  std::size_t score_permutations = 10000;
  std::string score_out;
  score_cmd->add_option("--artifact", score_artifacts, "Artifact JSONL path(s)")->required();
  score_cmd->add_option("--threshold", score_thresholds, "Type-2 threshold(s): 0.9 and/or 0.95")
      ->check(CLI::IsMember(std::vector<double>{0.9, 0.95}));
  score_cmd->add_option("--bootstrap", score_bootstrap, "Bootstrap resamples (0 = off)");
  score_cmd->add_option("--seed", score_seed, "Resampling seed");
  score_cmd->add_flag("--compare", score_compare,
                      "Permutation test of meta-d' between exactly two artifacts");
  score_cmd->add_option("--permutations", score_permutations, "Permutations for --compare");
  score_cmd->add_option("--out", score_out, "Write JSON here instead of stdout");

  // report
  auto* report_cmd = app.add_subcommand("report", "Render an aggregate results table");
  std::string report_mode = "baseline";
  std::string report_format = "md";
  std::string report_root = "runs";
  std::string report_out;
  double report_threshold = kThresholdDefault;
  int report_bins = kDefaultBins;
  std::string report_strategy = "equal-width";
  bool report_stats = false;
  std::size_t report_resamples = 10000;
  std::uint64_t report_seed = 0;
  report_cmd->add_option("--mode", report_mode,
                         "baseline|granularity|boundary|nonstandard-g1|nonstandard-g2");
  report_cmd->add_option("--format", report_format, "md|csv")->check(CLI::IsMember({"md", "csv"}));
  report_cmd->add_option("--root", report_root, "Directory holding {model}/{dataset}/{scale}.jsonl");
  report_cmd->add_option("--threshold", report_threshold, "Type-2 threshold (0.9 or 0.95)")
      ->check(CLI::IsMember(std::vector<double>{0.9, 0.95}));
  report_cmd->add_option("--bins", report_bins, "ECE bin count");
  report_cmd->add_option("--strategy", report_strategy, "equal-width|equal-mass")
      ->check(CLI::IsMember({"equal-width", "equal-mass"}));
  report_cmd->add_flag("--stats", report_stats, "Permutation stars against the [0,100] baseline");
  report_cmd->add_option("--n-resamples", report_resamples, "Permutations for --stats");
  report_cmd->add_option("--seed", report_seed, "Seed for --stats");
  report_cmd->add_option("--out", report_out, "Write the document here instead of stdout");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "ECE across bin counts and strategies");
  std::string sweep_artifact;
  std::vector<int> sweep_bins{kBinSweep.begin(), kBinSweep.end()};
  std::string sweep_format = "md";
  std::string sweep_out;
  sweep_cmd->add_option("--artifact", sweep_artifact, "Artifact JSONL path")->required();
  sweep_cmd->add_option("--bins", sweep_bins, "Bin counts");
  sweep_cmd->add_option("--format", sweep_format, "md|csv")->check(CLI::IsMember({"md", "csv"}));
  sweep_cmd->add_option("--out", sweep_out, "Write the document here instead of stdout");

  // validate
  app.add_subcommand("validate", "Run the estimator-recovery and oracle-equivalence suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("conditions")) {
      if (conditions_format == "json") {
        std::cout << conditions_catalog_json() << '\n';
      } else {
        std::cout << "| Label | Family | Lower | Upper |\n| --- | --- | --- | --- |\n";
        for (const auto& s : builtin_conditions()) {
          std::cout << "| " << s.label << " | " << to_string(s.family) << " | " << s.lower
                    << " | " << s.upper << " |\n";
        }
      }
      return 0;
    }

    if (app.got_subcommand("run")) {
      RunConfig config;
      if (!config_path.empty()) config = load_run_config(config_path);
      if (!run_dataset.empty()) config.dataset_path = run_dataset;
      if (!run_scales.empty()) config.scale_labels = run_scales;
      if (run_cmd->count("--adapter") || config.adapter_descriptor.empty()) {
        config.adapter_descriptor = run_adapter;
      }
      if (run_cmd->count("--seed")) config.seed = run_seed;
      if (run_cmd->count("--max-parallel")) config.max_parallel = run_parallel;
      if (run_cmd->count("--out") || config.output_dir.empty()) config.output_dir = run_out;
      if (!run_fixed_ts.empty()) config.fixed_timestamp = run_fixed_ts;
      // Synthetic and replay adapters are deterministic; pin the timestamp so
      // reruns are byte-identical unless the user already chose one.
      if (config.adapter_descriptor != "remote" && !config.fixed_timestamp) {
        config.fixed_timestamp = "1970-01-01T00:00:00Z";
      }
      if (config.dataset_path.empty()) throw std::invalid_argument("run needs --dataset");

      const std::vector<TaskInstance> tasks = load_dataset(config.dataset_path);
      for (const ScaleSpec& scale : resolve_scales(config.scale_labels)) {
        auto adapter =
            make_adapter(config.adapter_descriptor, tasks, scale, run_synth, config.seed, remote);
        const RunResult result = run_condition(config, tasks, scale, *adapter);
        std::cout << scale.label << ": " << result.n_new << " new, " << result.n_skipped
                  << " skipped, " << result.n_adapter_errors << " adapter errors -> "
                  << result.artifact.string() << '\n';
      }
      return 0;
    }

    if (app.got_subcommand("simulate")) {
      RunConfig config;
      config.dataset_name = sim_dataset_name;
      config.output_dir = sim_out;
      config.seed = sim_seed;
      config.fixed_timestamp = "1970-01-01T00:00:00Z";
      const std::vector<TaskInstance> tasks = make_synth_tasks(sim_n);
      for (const ScaleSpec& scale : resolve_scales(sim_scales)) {
        SyntheticAdapter adapter(tasks, scale, sim_synth.params(sim_seed));
        const RunResult result = run_condition(config, tasks, scale, adapter);
        std::cout << scale.label << ": " << result.n_new << " new, " << result.n_skipped
                  << " skipped -> " << result.artifact.string() << '\n';
      }
      return 0;
    }

    if (app.got_subcommand("score")) {
      ScoreOptions options;
      if (!score_thresholds.empty()) options.thresholds = score_thresholds;
      options.bootstrap_resamples = score_bootstrap;
      options.seed = score_seed;
      nlohmann::ordered_json out = nlohmann::ordered_json::array();
      std::vector<ArtifactData> loaded;
      for (const auto& path : score_artifacts) {
        loaded.push_back(load_artifact(path));
        nlohmann::ordered_json record = score_artifact(loaded.back(), options);
        record["path"] = path;
        out.push_back(std::move(record));
      }
      if (score_compare) {
        if (loaded.size() != 2) {
          throw std::invalid_argument("--compare needs exactly two --artifact paths");
        }
        nlohmann::ordered_json cmp = compare_artifacts(
            loaded[0], loaded[1], options.thresholds.front(), score_permutations, score_seed);
        nlohmann::ordered_json wrapper;
        wrapper["comparison"] = std::move(cmp);
        out.push_back(std::move(wrapper));
      }
      write_output(out.dump(2) + "\n", score_out);
      return 0;
    }

    if (app.got_subcommand("report")) {
      const auto refs = discover_artifacts(report_root);
      ReportOptions options;
      options.threshold = report_threshold;
      options.bins = report_bins;
      options.strategy = report_strategy == "equal-mass" ? BinStrategy::EqualMass
                                                         : BinStrategy::EqualWidth;
      options.with_stats = report_stats;
      options.n_resamples = report_resamples;
      options.seed = report_seed;
      const std::string doc =
          emit_report(refs, report_mode_from_string(report_mode),
                      report_format == "csv" ? DocFormat::Csv : DocFormat::Markdown, options);
      write_output(doc, report_out);
      return 0;
    }

    if (app.got_subcommand("sweep")) {
      const ArtifactData data = load_artifact(sweep_artifact);
      const std::string doc = ece_sweep(
          data, sweep_bins, sweep_format == "csv" ? DocFormat::Csv : DocFormat::Markdown);
      write_output(doc, sweep_out);
      return 0;
    }

    if (app.got_subcommand("validate")) {
      return run_validate();
    }
  } catch (const MissingCondition& e) {
    std::cerr << "error: MissingCondition: " << e.what() << '\n';
    return 1;
  } catch (const SchemaError& e) {
    std::cerr << "error: SchemaError: " << e.what() << '\n';
    return 1;
  } catch (const DuplicateId& e) {
    std::cerr << "error: DuplicateId: " << e.what() << '\n';
    return 1;
  } catch (const AdapterError& e) {
    std::cerr << "error: AdapterError: " << e.what() << '\n';
    return 1;
  } catch (const NoConvergence& e) {
    std::cerr << "error: NoConvergence: " << e.what() << '\n';
    return 1;
  } catch (const StatisticUndefinedTooOften& e) {
    std::cerr << "error: StatisticUndefinedTooOften: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: InvalidArgument: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "error: DomainError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

namespace {

// Self-check suites: the meta-d' fit against its analytic forward model, the
// rank AUROC against brute-force pair counting, and the quantile round trip.
int run_validate() {
  bool ok = true;

  {
    double worst = 0;
    for (double d = 0.25; d <= 4.0 + 1e-9; d += 0.25) {
      for (double c2 = 0.1; c2 <= 2.0 + 1e-9; c2 += 0.2) {
        const Type2Rates rates = ideal_type2_rates(d, c2);
        worst = std::max(worst, std::abs(fit_meta_d(rates.hr2, rates.far2) - d));
      }
    }
    const bool pass = worst <= 1e-6;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " meta-d' recovery grid (max |error| = " << worst
              << ")\n";
  }

  {
    Rng rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + rng.below(200);
      std::vector<EvalSample> samples;
      bool saw[2] = {false, false};
      for (std::size_t i = 0; i < n; ++i) {
        const int conf = static_cast<int>(rng.below(21)) * 5;
        const bool correct = rng.below(2) == 1;
        saw[correct]= true;
        samples.push_back(EvalSample{conf, conf / 100.0, correct});
      }
      if (!saw[0] || !saw[1]) continue;
      double pairs = 0;
      double wins = 0;
      for (const auto& a : samples) {
        if (!a.correct) continue;
        for (const auto& b : samples) {
          if (b.correct) continue;
          pairs += 1;
          if (a.conf_norm > b.conf_norm) wins += 1;
          else if (a.conf_norm == b.conf_norm) wins += 0.5;
        }
      }
      worst = std::max(worst, std::abs(*auroc(samples) - wins / pairs));
    }
    const bool pass = worst <= 1e-12;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " AUROC vs pair counting (max |error| = " << worst
              << ")\n";
  }

  {
    double worst = 0;
    for (int i = 0; i <= 1000; ++i) {
      const double p = std::pow(10.0, -12.0 + 12.0 * i / 1000.0);
      const double lo = std::min(p, 0.5);
      for (double q : {lo, 1.0 - lo}) {
        worst = std::max(worst, std::abs(normal_cdf(normal_inv_cdf(q)) - q));
      }
    }
    const bool pass = worst <= 1e-9;
    ok = ok && pass;
    std::cout << (pass ? "PASS" : "FAIL") << " normal quantile round trip (max |error| = "
              << worst << ")\n";
  }

  return ok ? 0 : 1;
}

}  // namespace
