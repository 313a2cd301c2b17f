#include "confscale/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

namespace confscale {

namespace {

using nlohmann::ordered_json;

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string pct1(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

struct Cell {
  ArtifactData data;
  DistributionDiagnostics diag;
  double accuracy = 0;
  std::optional<double> auroc_value;
  double ece_value = 0;
  SdtEstimate sdt;
};

Cell score_cell(ArtifactData data, const ReportOptions& options) {
  Cell c;
  c.diag = diagnostics(data.reports, data.scale, data.n_nonconforming);
  std::size_t n_correct = 0;
  for (const auto& s : data.samples) n_correct += s.correct ? 1 : 0;
  if (data.samples.empty()) throw std::runtime_error("artifact has no gradable samples");
  c.accuracy = static_cast<double>(n_correct) / static_cast<double>(data.samples.size());
  c.auroc_value = auroc(data.samples);
  c.ece_value = ece(data.samples, options.bins, options.strategy);
  c.sdt = estimate_sdt(data.samples, options.threshold, c.accuracy, data.samples.size());
  c.data = std::move(data);
  return c;
}

void pool_into(ArtifactData& into, ArtifactData&& from) {
  if (into.scale.label != from.scale.label) {
    throw std::runtime_error("cannot pool artifacts with different scales: " + into.scale.label +
                             " vs " + from.scale.label);
  }
  into.reports.insert(into.reports.end(), from.reports.begin(), from.reports.end());
  into.samples.insert(into.samples.end(), from.samples.begin(), from.samples.end());
  into.n_parsed += from.n_parsed;
  into.n_nonconforming += from.n_nonconforming;
  into.n_adapter_errors += from.n_adapter_errors;
  into.n_ungradable += from.n_ungradable;
}

// model -> scale label -> pooled cell data
using CellMap = std::map<std::string, std::map<std::string, ArtifactData>>;

CellMap load_cells(std::span<const ArtifactRef> artifacts) {
  CellMap cells;
  for (const auto& ref : artifacts) {
    ArtifactData data = load_artifact(ref.path);
    auto& by_scale = cells[ref.model];
    auto it = by_scale.find(data.scale.label);
    if (it == by_scale.end()) {
      by_scale.emplace(data.scale.label, std::move(data));
    } else {
      pool_into(it->second, std::move(data));
    }
  }
  return cells;
}

const ArtifactData& require_cell(const CellMap& cells, const std::string& model,
                                 const std::string& label) {
  const auto model_it = cells.find(model);
  if (model_it == cells.end()) throw MissingCondition(label);
  const auto it = model_it->second.find(label);
  if (it == model_it->second.end()) throw MissingCondition(label);
  return it->second;
}

std::vector<std::string> mode_scales(ReportMode mode) {
  switch (mode) {
    case ReportMode::Baseline: return {"[0,100]"};
    case ReportMode::Granularity: return {"[0,5]", "[0,10]", "[0,20]", "[0,50]", "[0,100]"};
    case ReportMode::Boundary: return {"[0,100]", "[20,100]", "[40,100]", "[60,100]"};
    case ReportMode::NonStandardG1: return {"[0,100]", "[0,73]", "[14,86]", "[7,79]"};
    case ReportMode::NonStandardG2: return {"[0,100]", "[3,38]", "[0,97]"};
  }
  throw std::logic_error("unknown report mode");
}

// Minimal CSV quoting; scale labels contain commas.
std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows, DocFormat format) {
  std::ostringstream out;
  if (format == DocFormat::Csv) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(header[i]);
    }
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(row[i]);
      }
      out << '\n';
    }
    return out.str();
  }
  out << '|';
  for (const auto& h : header) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
  out << '\n';
  for (const auto& row : rows) {
    out << '|';
    for (const auto& cell : row) out << ' ' << cell << " |";
    out << '\n';
  }
  return out.str();
}

std::string m_ratio_text(const SdtEstimate& e) {
  return e.m_ratio ? fmt2(*e.m_ratio) : "n/a";
}

// Permutation star for a condition cell against the model's [0,100] cell.
std::string significance_mark(const ArtifactData& baseline, const ArtifactData& cell,
                              const ReportOptions& options, std::size_t m_comparisons) {
  const TestResult t =
      permutation_test(cell.samples, baseline.samples, statistic::meta_d_stat(options.threshold),
                       options.n_resamples, options.seed, m_comparisons);
  return t.p_adjusted < 0.05 ? "*" : "";
}

std::string emit_baseline(const CellMap& cells, DocFormat format, const ReportOptions& options) {
  struct Row {
    std::string model;
    Cell cell;
  };
  std::vector<Row> rows;
  for (const auto& entry : cells) {
    const std::string& model = entry.first;
    Cell cell = score_cell(ArtifactData(require_cell(cells, model, "[0,100]")), options);
    rows.push_back({model, std::move(cell)});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const double ma = a.cell.sdt.m_ratio.value_or(-1e18);
    const double mb = b.cell.sdt.m_ratio.value_or(-1e18);
    if (ma != mb) return ma > mb;
    return a.model < b.model;
  });

  std::vector<std::string> header = {"Model",  "Top-1", "Top-3 (%)", "Unique",  "H (bits)",
                                     "Acc",    "AUROC", "ECE",       "meta-d'", "M_ratio"};
  std::vector<std::vector<std::string>> body;
  for (const auto& row : rows) {
    const auto& c = row.cell;
    body.push_back({
        row.model,
        std::to_string(c.diag.top1_value) + " (" + pct1(c.diag.top1_freq) + "%)",
        pct1(c.diag.top3_cum),
        std::to_string(c.diag.unique_count),
        fmt2(c.diag.entropy_bits),
        fmt2(c.accuracy),
        c.auroc_value ? fmt2(*c.auroc_value) : "n/a",
        fmt2(c.ece_value),
        fmt2(c.sdt.meta_d),
        m_ratio_text(c.sdt),
    });
  }
  return render_table(header, body, format);
}

std::string emit_granularity(const CellMap& cells, DocFormat format,
                             const ReportOptions& options) {
  const auto scales = mode_scales(ReportMode::Granularity);
  const std::size_t m = options.with_stats ? cells.size() * (scales.size() - 1) : 1;

  std::vector<std::string> header = {"Model"};
  for (const auto& s : scales) header.push_back("meta-d' " + s);
  for (const auto& s : scales) header.push_back("M_ratio " + s);

  std::vector<std::vector<std::string>> body;
  for (const auto& entry : cells) {
    const std::string& model = entry.first;
    std::vector<Cell> row_cells;
    for (const auto& label : scales) {
      row_cells.push_back(score_cell(ArtifactData(require_cell(cells, model, label)), options));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < row_cells.size(); ++i) {
      if (row_cells[i].sdt.m_ratio.value_or(-1e18) >
          row_cells[best].sdt.m_ratio.value_or(-1e18)) {
        best = i;
      }
    }
    std::vector<std::string> row = {model};
    const ArtifactData& baseline = require_cell(cells, model, "[0,100]");
    std::vector<std::string> marks(scales.size());
    if (options.with_stats) {
      for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] == "[0,100]") continue;
        marks[i] = significance_mark(baseline, row_cells[i].data, options, m);
      }
    }
    for (std::size_t i = 0; i < row_cells.size(); ++i) {
      row.push_back(fmt2(row_cells[i].sdt.meta_d) + marks[i]);
    }
    for (std::size_t i = 0; i < row_cells.size(); ++i) {
      std::string cell = m_ratio_text(row_cells[i].sdt) + marks[i];
      if (i == best && format == DocFormat::Markdown) cell = "**" + cell + "**";
      row.push_back(std::move(cell));
    }
    body.push_back(std::move(row));
  }
  return render_table(header, body, format);
}

// Boundary and non-standard tables share a (model x metric) row layout with
// scale conditions as columns.
std::string emit_metric_rows(const CellMap& cells, ReportMode mode, DocFormat format,
                             const ReportOptions& options) {
  const auto scales = mode_scales(mode);
  const bool boundary = mode == ReportMode::Boundary;
  const std::vector<std::string> metrics =
      boundary ? std::vector<std::string>{"meta-d'", "M_ratio", "Util. (%)"}
               : std::vector<std::string>{"Round (%)", "Viol. (%)", "meta-d'", "M_ratio"};
  const std::size_t m = options.with_stats ? cells.size() * (scales.size() - 1) : 1;

  std::vector<std::string> header = {"Model", "Metric"};
  header.insert(header.end(), scales.begin(), scales.end());

  std::vector<std::vector<std::string>> body;
  for (const auto& entry : cells) {
    const std::string& model = entry.first;
    std::vector<Cell> row_cells;
    for (const auto& label : scales) {
      row_cells.push_back(score_cell(ArtifactData(require_cell(cells, model, label)), options));
    }
    std::vector<std::string> marks(scales.size());
    if (options.with_stats) {
      const ArtifactData& baseline = require_cell(cells, model, "[0,100]");
      for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] == "[0,100]") continue;
        marks[i] = significance_mark(baseline, row_cells[i].data, options, m);
      }
    }
    for (const auto& metric : metrics) {
      std::vector<std::string> row = {model, metric};
      for (std::size_t i = 0; i < row_cells.size(); ++i) {
        const Cell& c = row_cells[i];
        if (metric == "meta-d'") {
          row.push_back(fmt2(c.sdt.meta_d) + marks[i]);
        } else if (metric == "M_ratio") {
          row.push_back(m_ratio_text(c.sdt) + marks[i]);
        } else if (metric == "Util. (%)") {
          row.push_back(pct1(c.diag.utilization));
        } else if (metric == "Round (%)") {
          row.push_back(pct1(c.diag.round_pref));
        } else {
          row.push_back(pct1(c.diag.violation_rate));
        }
      }
      body.push_back(std::move(row));
    }
  }
  return render_table(header, body, format);
}

}  // namespace

ReportMode report_mode_from_string(const std::string& name) {
  if (name == "baseline") return ReportMode::Baseline;
  if (name == "granularity") return ReportMode::Granularity;
  if (name == "boundary") return ReportMode::Boundary;
  if (name == "nonstandard-g1") return ReportMode::NonStandardG1;
  if (name == "nonstandard-g2") return ReportMode::NonStandardG2;
  throw std::invalid_argument("unknown report mode: " + name);
}

std::string emit_report(std::span<const ArtifactRef> artifacts, ReportMode mode, DocFormat format,
                        const ReportOptions& options) {
  if (artifacts.empty()) throw MissingCondition(mode_scales(mode).front());
  const CellMap cells = load_cells(artifacts);
  switch (mode) {
    case ReportMode::Baseline: return emit_baseline(cells, format, options);
    case ReportMode::Granularity: return emit_granularity(cells, format, options);
    default: return emit_metric_rows(cells, mode, format, options);
  }
}

std::string ece_sweep(const ArtifactData& artifact, std::span<const int> bin_counts,
                      DocFormat format) {
  if (artifact.samples.empty()) throw std::invalid_argument("ece_sweep: empty input");
  std::vector<std::string> header = {"B", "Equal-Width", "Equal-Mass", "|Delta|"};
  std::vector<std::vector<std::string>> body;
  for (int b : bin_counts) {
    const double ew = ece(artifact.samples, b, BinStrategy::EqualWidth);
    const double em = ece(artifact.samples, b, BinStrategy::EqualMass);
    std::vector<std::string> row = {std::to_string(b), fmt2(ew), fmt2(em)};
    row.push_back(b == kDefaultBins ? fmt2(std::abs(ew - em)) : "");
    body.push_back(std::move(row));
  }
  return render_table(header, body, format);
}

nlohmann::ordered_json score_artifact(const ArtifactData& artifact, const ScoreOptions& options) {
  ordered_json j;
  j["scale"] = artifact.scale.label;
  j["n_parsed"] = artifact.n_parsed;
  j["n_nonconforming"] = artifact.n_nonconforming;
  j["n_adapter_errors"] = artifact.n_adapter_errors;
  j["n_ungradable"] = artifact.n_ungradable;
  j["n_graded"] = artifact.samples.size();

  const DistributionDiagnostics d =
      diagnostics(artifact.reports, artifact.scale, artifact.n_nonconforming);
  j["top1_value"] = d.top1_value;
  j["top1_freq"] = d.top1_freq;
  j["top3_cum"] = d.top3_cum;
  j["unique_count"] = d.unique_count;
  j["entropy_bits"] = d.entropy_bits;
  j["round_pref"] = d.round_pref;
  j["violation_rate"] = d.violation_rate;
  j["nonconformance_rate"] = d.nonconformance_rate;
  j["utilization"] = d.utilization;

  std::size_t n_correct = 0;
  for (const auto& s : artifact.samples) n_correct += s.correct ? 1 : 0;
  const double accuracy = artifact.samples.empty()
                              ? 0.0
                              : static_cast<double>(n_correct) /
                                    static_cast<double>(artifact.samples.size());
  j["accuracy"] = accuracy;
  const auto auc = artifact.samples.empty() ? std::nullopt : auroc(artifact.samples);
  j["auroc"] = auc ? ordered_json(*auc) : ordered_json(nullptr);

  ordered_json ece_block;
  for (BinStrategy strategy : {BinStrategy::EqualWidth, BinStrategy::EqualMass}) {
    ordered_json per_b;
    for (int b : options.bin_counts) {
      if (!artifact.samples.empty()) {
        per_b[std::to_string(b)] = ece(artifact.samples, b, strategy);
      }
    }
    ece_block[to_string(strategy)] = std::move(per_b);
  }
  j["ece"] = std::move(ece_block);

  ordered_json sdt_block = ordered_json::array();
  for (double t : options.thresholds) {
    if (artifact.samples.empty()) break;
    const SdtEstimate e = estimate_sdt(artifact.samples, t, accuracy, artifact.samples.size());
    ordered_json ej;
    ej["threshold"] = e.threshold;
    ej["d_prime"] = e.d_prime;
    ej["meta_d"] = e.meta_d;
    ej["m_ratio"] = e.m_ratio ? ordered_json(*e.m_ratio) : ordered_json(nullptr);
    ej["hr2"] = e.hr2;
    ej["far2"] = e.far2;
    sdt_block.push_back(std::move(ej));
  }
  j["sdt"] = std::move(sdt_block);

  if (options.bootstrap_resamples > 0 && !artifact.samples.empty()) {
    ordered_json cis = ordered_json::array();
    std::vector<Statistic> stats = {statistic::accuracy(),
                                    statistic::ece_stat(kDefaultBins, BinStrategy::EqualWidth),
                                    statistic::auroc_stat(),
                                    statistic::meta_d_stat(options.thresholds.front())};
    for (const auto& s : stats) {
      const ConfidenceInterval ci = bootstrap_ci(artifact.samples, s,
                                                 options.bootstrap_resamples, options.level,
                                                 options.seed);
      ordered_json cj;
      cj["statistic"] = ci.statistic;
      cj["point"] = ci.point;
      cj["lo"] = ci.lo;
      cj["hi"] = ci.hi;
      cj["level"] = ci.level;
      cj["n"] = ci.n_resamples;
      cj["seed"] = ci.seed;
      cj["n_redraws"] = ci.n_redraws;
      cis.push_back(std::move(cj));
    }
    j["bootstrap"] = std::move(cis);
  }
  return j;
}

nlohmann::ordered_json compare_artifacts(const ArtifactData& a, const ArtifactData& b,
                                         double threshold, std::size_t n_permutations,
                                         std::uint64_t seed, std::size_t m_comparisons) {
  const Statistic stat = statistic::meta_d_stat(threshold);
  const TestResult t =
      permutation_test(a.samples, b.samples, stat, n_permutations, seed, m_comparisons);
  ordered_json j;
  j["statistic"] = stat.name;
  j["point"] = t.observed_stat;
  j["p_value"] = t.p_value;
  j["p_adjusted"] = t.p_adjusted;
  j["seed"] = t.seed;
  j["n"] = t.n_permutations;
  return j;
}

std::vector<ArtifactRef> discover_artifacts(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::vector<ArtifactRef> refs;
  if (!fs::is_directory(root)) return refs;
  // Preferred layout: root/model/dataset/scale.jsonl.
  for (const auto& model_dir : fs::directory_iterator(root)) {
    if (!model_dir.is_directory()) continue;
    for (const auto& dataset_dir : fs::directory_iterator(model_dir)) {
      if (!dataset_dir.is_directory()) continue;
      for (const auto& file : fs::directory_iterator(dataset_dir)) {
        if (file.path().extension() == ".jsonl") {
          refs.push_back({model_dir.path().filename().string(),
                          dataset_dir.path().filename().string(), file.path()});
        }
      }
    }
  }
  if (!refs.empty()) {
    std::sort(refs.begin(), refs.end(),
              [](const ArtifactRef& a, const ArtifactRef& b) { return a.path < b.path; });
    return refs;
  }
  // Fallback: root itself is a model dir (root/dataset/scale.jsonl).
  for (const auto& dataset_dir : fs::directory_iterator(root)) {
    if (!dataset_dir.is_directory()) continue;
    for (const auto& file : fs::directory_iterator(dataset_dir)) {
      if (file.path().extension() == ".jsonl") {
        refs.push_back({root.filename().string(), dataset_dir.path().filename().string(),
                        file.path()});
      }
    }
  }
  std::sort(refs.begin(), refs.end(),
            [](const ArtifactRef& a, const ArtifactRef& b) { return a.path < b.path; });
  return refs;
}

}  // namespace confscale
