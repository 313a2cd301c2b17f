#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "confscale/sample.hpp"

namespace confscale {

enum class BinStrategy { EqualWidth, EqualMass };

const char* to_string(BinStrategy strategy);

inline constexpr int kDefaultBins = 10;
inline constexpr std::array<int, 6> kBinSweep{5, 10, 15, 20, 30, 50};

/// Expected calibration error over normalized confidences.
/// EqualWidth: B bins of width 1/B, final bin right-closed so 1.0 lands in it.
/// EqualMass: stable sort by confidence, then B contiguous groups of size
/// floor(N/B) or ceil(N/B), larger groups first, ties kept adjacent.
double ece(std::span<const EvalSample> samples, int bins, BinStrategy strategy);

/// Rank-based (Mann-Whitney) AUROC; ties between a correct and an incorrect
/// confidence count 0.5. Empty optional when only one class is present.
std::optional<double> auroc(std::span<const EvalSample> samples);

/// One parsed report: the raw integer and its range classification.
struct RawReport {
  long long value = 0;
  ReportClassification cls;
};

struct DistributionDiagnostics {
  int top1_value = 0;
  double top1_freq = 0;
  double top3_cum = 0;
  int unique_count = 0;
  double entropy_bits = 0;
  double round_pref = 0;          // in-range reports on multiples of 5
  double violation_rate = 0;      // of all parsed reports
  double nonconformance_rate = 0; // nonconforming / (nonconforming + parsed)
  double utilization = 0;         // (P95 - P5) / width, nearest-rank percentiles
};

/// Distribution diagnostics over the clamped raw values of all parsed
/// reports. Nearest-rank percentiles; Shannon entropy in bits of the
/// empirical clamped-value distribution.
DistributionDiagnostics diagnostics(std::span<const RawReport> reports,
                                    const ScaleSpec& scale,
                                    std::size_t n_nonconforming);

}  // namespace confscale
