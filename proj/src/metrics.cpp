#include "confscale/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace confscale {

const char* to_string(BinStrategy strategy) {
  return strategy == BinStrategy::EqualWidth ? "equal_width" : "equal_mass";
}

namespace {

struct BinAccum {
  std::size_t n = 0;
  double conf_sum = 0;
  double acc_sum = 0;
};

double ece_from_bins(std::span<const BinAccum> bins, std::size_t total) {
  double e = 0;
  for (const auto& b : bins) {
    if (b.n == 0) continue;
    const double conf = b.conf_sum / static_cast<double>(b.n);
    const double acc = b.acc_sum / static_cast<double>(b.n);
    e += (static_cast<double>(b.n) / static_cast<double>(total)) * std::abs(acc - conf);
  }
  return e;
}

}  // namespace

double ece(std::span<const EvalSample> samples, int bins, BinStrategy strategy) {
  if (samples.empty()) throw std::invalid_argument("ece: empty input");
  if (bins < 1) throw std::invalid_argument("ece: bins must be >= 1");
  const std::size_t n = samples.size();
  const std::size_t b_count = static_cast<std::size_t>(bins);
  std::vector<BinAccum> acc(b_count);

  if (strategy == BinStrategy::EqualWidth) {
    for (const auto& s : samples) {
      const double scaled = s.conf_norm * bins;
      auto idx = scaled <= 0.0 ? 0 : static_cast<std::size_t>(scaled);
      if (idx >= b_count) idx = b_count - 1;  // right-closed final bin
      acc[idx].n++;
      acc[idx].conf_sum += s.conf_norm;
      acc[idx].acc_sum += s.correct ? 1.0 : 0.0;
    }
    return ece_from_bins(acc, n);
  }

  std::vector<EvalSample> sorted(samples.begin(), samples.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const EvalSample& a, const EvalSample& b) { return a.conf_norm < b.conf_norm; });
  const std::size_t base = n / b_count;
  const std::size_t extra = n % b_count;  // first `extra` groups get one more
  std::size_t pos = 0;
  for (std::size_t b = 0; b < b_count; ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i, ++pos) {
      acc[b].n++;
      acc[b].conf_sum += sorted[pos].conf_norm;
      acc[b].acc_sum += sorted[pos].correct ? 1.0 : 0.0;
    }
  }
  return ece_from_bins(acc, n);
}

std::optional<double> auroc(std::span<const EvalSample> samples) {
  std::vector<double> pos;
  std::vector<double> neg;
  for (const auto& s : samples) {
    (s.correct ? pos : neg).push_back(s.conf_norm);
  }
  if (pos.empty() || neg.empty()) return std::nullopt;

  // Midrank formulation: U = R_pos - n_pos(n_pos+1)/2 equals the pair count
  // with ties worth 0.5, computed in O(n log n).
  struct Scored {
    double value;
    bool correct;
  };
  std::vector<Scored> all;
  all.reserve(samples.size());
  for (double v : pos) all.push_back({v, true});
  for (double v : neg) all.push_back({v, false});
  std::sort(all.begin(), all.end(),
            [](const Scored& a, const Scored& b) { return a.value < b.value; });

  double rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].value == all[i].value) ++j;
    const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].correct) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double n1 = static_cast<double>(pos.size());
  const double n0 = static_cast<double>(neg.size());
  const double u = rank_sum_pos - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * n0);
}

namespace {

// Nearest-rank percentile over a sorted vector: value at ceil(p*N), 1-based.
int nearest_rank(const std::vector<int>& sorted, double p) {
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  if (rank < 1) rank = 1;
  if (rank > sorted.size()) rank = sorted.size();
  return sorted[rank - 1];
}

}  // namespace

DistributionDiagnostics diagnostics(std::span<const RawReport> reports,
                                    const ScaleSpec& scale,
                                    std::size_t n_nonconforming) {
  if (reports.empty()) throw std::invalid_argument("diagnostics: empty input");

  std::vector<int> clamped;
  clamped.reserve(reports.size());
  std::map<int, std::size_t> counts;
  std::size_t n_violation = 0;
  std::size_t n_in_range = 0;
  std::size_t n_in_range_round = 0;
  for (const auto& r : reports) {
    const int v = clamp_to_scale(r.value, scale);
    clamped.push_back(v);
    counts[v]++;
    if (r.cls.kind == RangeKind::Violation) n_violation++;
    if (r.cls.kind == RangeKind::InRange) {
      n_in_range++;
      const long long rem = ((r.value % 5) + 5) % 5;
      if (rem == 0) n_in_range_round++;
    }
  }
  const double n = static_cast<double>(reports.size());

  DistributionDiagnostics d;
  d.unique_count = static_cast<int>(counts.size());

  // Frequency ranking; ties broken by value for determinism.
  std::vector<std::pair<int, std::size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  d.top1_value = ranked[0].first;
  d.top1_freq = static_cast<double>(ranked[0].second) / n;
  double top3 = 0;
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
    top3 += static_cast<double>(ranked[i].second);
  }
  d.top3_cum = top3 / n;

  double h = 0;
  for (const auto& [value, count] : counts) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  d.entropy_bits = std::max(h, 0.0);

  d.round_pref = n_in_range == 0
                     ? 0.0
                     : static_cast<double>(n_in_range_round) / static_cast<double>(n_in_range);
  d.violation_rate = static_cast<double>(n_violation) / n;
  d.nonconformance_rate =
      static_cast<double>(n_nonconforming) /
      (static_cast<double>(n_nonconforming) + n);

  std::sort(clamped.begin(), clamped.end());
  const int p5 = nearest_rank(clamped, 0.05);
  const int p95 = nearest_rank(clamped, 0.95);
  d.utilization = static_cast<double>(p95 - p5) / static_cast<double>(scale.width());
  return d;
}

}  // namespace confscale
