#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "confscale/metrics.hpp"
#include "confscale/stats.hpp"

using namespace confscale;

namespace {

std::vector<EvalSample> samples_of(std::initializer_list<std::pair<double, bool>> pairs) {
  std::vector<EvalSample> v;
  for (const auto& [conf, correct] : pairs) {
    v.push_back({static_cast<int>(conf * 100), conf, correct});
  }
  return v;
}

// O(n^2) pair-counting oracle, ties worth one half.
double auroc_brute_force(const std::vector<EvalSample>& samples) {
  double pairs = 0;
  double wins = 0;
  for (const auto& a : samples) {
    if (!a.correct) continue;
    for (const auto& b : samples) {
      if (b.correct) continue;
      pairs += 1.0;
      if (a.conf_norm > b.conf_norm) {
        wins += 1.0;
      } else if (a.conf_norm == b.conf_norm) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_CASE("equal-width ece matches the hand enumeration") {
  const auto s = samples_of({{0.95, true}, {0.95, false}, {0.65, true}, {0.05, false}});
  // bins at B=10: {0.95,0.95} gap 0.45, {0.65} gap 0.35, {0.05} gap 0.05
  CHECK(ece(s, 10, BinStrategy::EqualWidth) == doctest::Approx(0.325).epsilon(1e-12));

  CHECK(ece(samples_of({{1.0, true}}), 10, BinStrategy::EqualWidth) == doctest::Approx(0.0));
  CHECK(ece(samples_of({{1.0, true}}), 3, BinStrategy::EqualWidth) == doctest::Approx(0.0));

  CHECK_THROWS_AS(ece({}, 10, BinStrategy::EqualWidth), std::invalid_argument);
  CHECK_THROWS_AS(ece(s, 0, BinStrategy::EqualWidth), std::invalid_argument);
}

TEST_CASE("ece is zero when every bin is perfectly calibrated") {
  // Four samples at 0.25, one correct; four at 0.75, three correct.
  const auto s = samples_of({{0.25, true},
                             {0.25, false},
                             {0.25, false},
                             {0.25, false},
                             {0.75, true},
                             {0.75, true},
                             {0.75, true},
                             {0.75, false}});
  CHECK(ece(s, 10, BinStrategy::EqualWidth) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ece(s, 2, BinStrategy::EqualMass) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("equal-mass ece splits larger groups first") {
  // N=10, B=3 -> group sizes 4,3,3.
  const auto s = samples_of({{0.1, false},
                             {0.2, false},
                             {0.3, true},
                             {0.4, false},
                             {0.5, true},
                             {0.6, true},
                             {0.7, false},
                             {0.8, true},
                             {0.9, true},
                             {1.0, true}});
  // gaps: group1 = 0, group2 = |2/3 - 0.6|, group3 = |1 - 0.9|
  CHECK(ece(s, 3, BinStrategy::EqualMass) == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("equal-mass bins stay within one sample of N/B") {
  // Cross-check against an independent re-binning on random draws.
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng.below(200);
    const int bins = 1 + static_cast<int>(rng.below(12));
    std::vector<EvalSample> s;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(rng.below(101));
      s.push_back({c, c / 100.0, rng.below(2) == 1});
    }
    std::vector<EvalSample> sorted = s;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const EvalSample& a, const EvalSample& b) {
                       return a.conf_norm < b.conf_norm;
                     });
    const std::size_t base = n / bins;
    const std::size_t extra = n % bins;
    double expected = 0;
    std::size_t pos = 0;
    for (int b = 0; b < bins; ++b) {
      const std::size_t size = base + (static_cast<std::size_t>(b) < extra ? 1 : 0);
      if (size == 0) continue;
      CHECK(size >= base);
      CHECK(size <= base + 1);
      double conf = 0;
      double acc = 0;
      for (std::size_t i = 0; i < size; ++i, ++pos) {
        conf += sorted[pos].conf_norm;
        acc += sorted[pos].correct ? 1 : 0;
      }
      expected += (static_cast<double>(size) / n) * std::abs(acc / size - conf / size);
    }
    CHECK(ece(s, bins, BinStrategy::EqualMass) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("auroc follows the pair-counting definition") {
  CHECK(*auroc(samples_of({{0.9, true}, {0.8, false}, {0.7, true}})) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*auroc(samples_of({{0.9, true}, {0.1, false}})) == doctest::Approx(1.0));
  CHECK(*auroc(samples_of({{0.5, true}, {0.5, false}, {0.5, true}})) == doctest::Approx(0.5));

  CHECK_FALSE(auroc(samples_of({{0.9, true}, {0.8, true}})).has_value());
  CHECK_FALSE(auroc(samples_of({{0.9, false}})).has_value());
}

TEST_CASE("auroc equals brute force and survives monotone transforms") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(120);
    std::vector<EvalSample> s;
    bool has_pos = false;
    bool has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = static_cast<int>(rng.below(11)) * 10;  // heavy ties
      const bool correct = rng.below(2) == 1;
      has_pos |= correct;
      has_neg |= !correct;
      s.push_back({c, c / 100.0, correct});
    }
    if (!has_pos || !has_neg) continue;
    const double fast = *auroc(s);
    CHECK(fast == doctest::Approx(auroc_brute_force(s)).epsilon(1e-12));

    std::vector<EvalSample> warped = s;
    for (auto& x : warped) x.conf_norm = 0.2 + 0.5 * (x.conf_norm * x.conf_norm * x.conf_norm);
    CHECK(*auroc(warped) == doctest::Approx(fast).epsilon(1e-12));
  }
}

namespace {

std::vector<RawReport> reports_of(const std::vector<long long>& values, const ScaleSpec& scale) {
  std::vector<RawReport> r;
  for (long long v : values) r.push_back({v, classify_report(v, scale)});
  return r;
}

}  // namespace

TEST_CASE("diagnostics: entropy of the uniform distribution over 101 values") {
  const auto scale = ScaleSpec::make(0, 100, ScaleFamily::Baseline);
  std::vector<long long> values;
  for (int v = 0; v <= 100; ++v) values.push_back(v);
  const auto d = diagnostics(reports_of(values, scale), scale, 0);
  CHECK(d.entropy_bits == doctest::Approx(6.66).epsilon(0.0016));  // within +-0.01
  CHECK(d.entropy_bits == doctest::Approx(std::log2(101.0)).epsilon(1e-9));
  CHECK(d.unique_count == 101);
  CHECK(d.top1_freq == doctest::Approx(1.0 / 101));
  // nearest-rank: P5 = 6th of 101 = 5, P95 = 96th = 95
  CHECK(d.utilization == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("diagnostics: round-number preference") {
  const auto scale = ScaleSpec::make(0, 100, ScaleFamily::Baseline);
  const auto d = diagnostics(reports_of({90, 95, 100, 87}, scale), scale, 0);
  CHECK(d.round_pref == doctest::Approx(0.75).epsilon(1e-12));

  const auto all_round = diagnostics(reports_of({0, 5, 10, 95, 100, 55}, scale), scale, 0);
  CHECK(all_round.round_pref == doctest::Approx(1.0));
}

TEST_CASE("diagnostics: constant distribution degenerates cleanly") {
  const auto scale = ScaleSpec::make(0, 100, ScaleFamily::Baseline);
  const auto d = diagnostics(reports_of({95, 95, 95, 95}, scale), scale, 0);
  CHECK(d.top1_value == 95);
  CHECK(d.top1_freq == doctest::Approx(1.0));
  CHECK(d.top3_cum == doctest::Approx(1.0));
  CHECK(d.unique_count == 1);
  CHECK(d.entropy_bits == doctest::Approx(0.0));
  CHECK(d.utilization == doctest::Approx(0.0));
}

TEST_CASE("diagnostics: violation, nonconformance, and top-3 bookkeeping") {
  const auto scale = ScaleSpec::make(3, 38, ScaleFamily::NonStandard);
  // 40 is a violation (distance 2 > 1.75), 39 soft, rest in range.
  const auto d = diagnostics(reports_of({10, 10, 10, 20, 20, 35, 39, 40}, scale), scale, 2);
  CHECK(d.violation_rate == doctest::Approx(1.0 / 8).epsilon(1e-12));
  CHECK(d.nonconformance_rate == doctest::Approx(2.0 / 10).epsilon(1e-12));
  CHECK(d.top1_value == 10);
  // clamped values: 10x3, 20x2, 35, 38, 38 -> top3 = {10, 38, 20}
  CHECK(d.top3_cum == doctest::Approx(7.0 / 8).epsilon(1e-12));
  // round_pref counts in-range reports only: {10,10,10,20,20,35} all round
  CHECK(d.round_pref == doctest::Approx(1.0));

  CHECK_THROWS_AS(diagnostics({}, scale, 0), std::invalid_argument);
}

TEST_CASE("diagnostics: top-3 equals the sum of the three largest frequencies") {
  Rng rng(17);
  const auto scale = ScaleSpec::make(0, 100, ScaleFamily::Baseline);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<long long> values;
    const std::size_t n = 1 + rng.below(300);
    for (std::size_t i = 0; i < n; ++i) values.push_back(rng.below(101));
    const auto d = diagnostics(reports_of(values, scale), scale, 0);

    std::map<long long, std::size_t> counts;
    for (long long v : values) counts[v]++;
    std::vector<std::size_t> freq;
    for (const auto& [v, c] : counts) freq.push_back(c);
    std::sort(freq.rbegin(), freq.rend());
    std::size_t top3 = 0;
    for (std::size_t i = 0; i < freq.size() && i < 3; ++i) top3 += freq[i];
    CHECK(d.top3_cum == doctest::Approx(static_cast<double>(top3) / n).epsilon(1e-12));
    CHECK(d.top1_freq == doctest::Approx(static_cast<double>(freq[0]) / n).epsilon(1e-12));
    CHECK(d.top1_freq <= d.top3_cum);
    CHECK((d.entropy_bits == 0.0) == (d.unique_count == 1));
  }
}
