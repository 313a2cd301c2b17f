#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "confscale/harness.hpp"
#include "confscale/metrics.hpp"
#include "confscale/sdt.hpp"
#include "confscale/stats.hpp"

namespace confscale {

enum class ReportMode { Baseline, Granularity, Boundary, NonStandardG1, NonStandardG2 };
enum class DocFormat { Markdown, Csv };

ReportMode report_mode_from_string(const std::string& name);

struct MissingCondition : std::runtime_error {
  std::string label;
  explicit MissingCondition(std::string label_)
      : std::runtime_error("missing condition: " + label_), label(std::move(label_)) {}
};

/// One condition x dataset x model artifact on disk.
struct ArtifactRef {
  std::string model;
  std::string dataset;
  std::filesystem::path path;
};

struct ReportOptions {
  double threshold = kThresholdDefault;
  int bins = kDefaultBins;
  BinStrategy strategy = BinStrategy::EqualWidth;
  bool with_stats = false;        // permutation stars against the [0,100] baseline
  std::size_t n_resamples = 10000;
  std::uint64_t seed = 0;
};

/// Renders the table for the requested mode; artifacts of the same
/// (model, scale) cell are pooled across datasets. Baseline rows are sorted
/// by M_ratio descending, ties broken by model label.
std::string emit_report(std::span<const ArtifactRef> artifacts, ReportMode mode, DocFormat format,
                        const ReportOptions& options = {});

/// ECE per bin count under both binning strategies, with the equal-width vs
/// equal-mass gap at B=10.
std::string ece_sweep(const ArtifactData& artifact, std::span<const int> bin_counts,
                      DocFormat format);

struct ScoreOptions {
  std::vector<int> bin_counts{kBinSweep.begin(), kBinSweep.end()};
  std::vector<double> thresholds{kThresholdDefault, kThresholdAlt};
  std::size_t bootstrap_resamples = 0;  // 0 = no bootstrap block
  double level = 0.95;
  std::uint64_t seed = 0;
};

/// The full metric record for one artifact: diagnostics, ECE per (B,
/// strategy), AUROC, SDT estimates per threshold, optional bootstrap CIs.
nlohmann::ordered_json score_artifact(const ArtifactData& artifact,
                                      const ScoreOptions& options = {});

/// Permutation comparison of two artifacts on the meta-d' point estimate,
/// serialized with the standard statistics keys.
nlohmann::ordered_json compare_artifacts(const ArtifactData& a, const ArtifactData& b,
                                         double threshold, std::size_t n_permutations,
                                         std::uint64_t seed, std::size_t m_comparisons = 1);

/// Discovers {model}/{dataset}/{scale}.jsonl artifacts under a root
/// directory (or {dataset}/{scale}.jsonl, taking the root name as model).
std::vector<ArtifactRef> discover_artifacts(const std::filesystem::path& root);

}  // namespace confscale
