#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "confscale/stats.hpp"

using namespace confscale;

namespace {

std::vector<EvalSample> constant_samples(std::size_t n, double conf, bool correct) {
  return std::vector<EvalSample>(n, EvalSample{static_cast<int>(conf * 100), conf, correct});
}

}  // namespace

TEST_CASE("the engine behind Rng matches the standard's reference output") {
  std::mt19937_64 engine;  // default seed 5489
  std::uint64_t last = 0;
  for (int i = 0; i < 10000; ++i) last = engine();
  CHECK(last == 9981545732273789042ULL);
}

TEST_CASE("rng distributions stay in range and substreams differ") {
  Rng rng(123);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(rng.below(7) < 7);
  }
  Rng a = Rng::substream(42, 0);
  Rng b = Rng::substream(42, 1);
  Rng a2 = Rng::substream(42, 0);
  CHECK(a.next_u64() != b.next_u64());
  Rng a3 = Rng::substream(42, 0);
  CHECK(a2.next_u64() == a3.next_u64());
  CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
}

TEST_CASE("rng normal draws have roughly standard moments") {
  Rng rng(7);
  double sum = 0;
  double sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.03));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("bootstrap on constant data collapses to the point") {
  const auto s = constant_samples(40, 0.75, true);
  const auto ci = bootstrap_ci(s, statistic::mean_confidence(), 500, 0.95, 3);
  CHECK(ci.point == doctest::Approx(0.75));
  CHECK(ci.lo == ci.point);
  CHECK(ci.hi == ci.point);
  CHECK(ci.n_redraws == 0);
}

TEST_CASE("bootstrap is deterministic per seed and brackets the mean") {
  std::vector<EvalSample> s;
  for (int i = 0; i < 50; ++i) s.push_back({i % 2 == 0 ? 0 : 100, i % 2 == 0 ? 0.0 : 1.0, true});

  const auto a = bootstrap_ci(s, statistic::mean_confidence(), 10000, 0.95, 7);
  const auto b = bootstrap_ci(s, statistic::mean_confidence(), 10000, 0.95, 7);
  CHECK(a.lo == b.lo);  // bit-identical
  CHECK(a.hi == b.hi);
  CHECK(a.point == b.point);
  CHECK(a.lo <= 0.5);
  CHECK(a.hi >= 0.5);

  // Seed sensitivity, on continuous-valued data where quantile collisions
  // across seeds are vanishingly unlikely.
  std::vector<EvalSample> cont;
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const double u = rng.uniform01();
    cont.push_back({static_cast<int>(u * 100), u, true});
  }
  const auto c = bootstrap_ci(cont, statistic::mean_confidence(), 2000, 0.95, 8);
  const auto d = bootstrap_ci(cont, statistic::mean_confidence(), 2000, 0.95, 9);
  CHECK((c.lo != d.lo || c.hi != d.hi));

  CHECK_THROWS_AS(bootstrap_ci({}, statistic::mean_confidence(), 100, 0.95, 1),
                  std::invalid_argument);
}

TEST_CASE("bootstrap interval width shrinks with sample size") {
  const auto width_at = [](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EvalSample> s;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = rng.uniform01();
      s.push_back({static_cast<int>(c * 100), c, rng.below(2) == 1});
    }
    const auto ci = bootstrap_ci(s, statistic::mean_confidence(), 400, 0.95, seed);
    return ci.hi - ci.lo;
  };
  std::vector<double> small;
  std::vector<double> large;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    small.push_back(width_at(250, 100 + rep));
    large.push_back(width_at(4000, 300 + rep));
  }
  std::sort(small.begin(), small.end());
  std::sort(large.begin(), large.end());
  CHECK(large[large.size() / 2] < small[small.size() / 2]);
}

TEST_CASE("statistic undefined on too many resamples raises the typed error") {
  // One incorrect among ten: ~35% of resamples miss it, making AUROC
  // undefined far more often than the 1% redraw budget.
  std::vector<EvalSample> s = constant_samples(9, 0.9, true);
  s.push_back({10, 0.1, false});
  CHECK_THROWS_AS(bootstrap_ci(s, statistic::auroc_stat(), 2000, 0.95, 1),
                  StatisticUndefinedTooOften);
}

TEST_CASE("permutation test: identical groups are insignificant") {
  std::vector<EvalSample> group;
  Rng rng(31);
  for (int i = 0; i < 60; ++i) {
    const int c = static_cast<int>(rng.below(101));
    group.push_back({c, c / 100.0, rng.below(2) == 1});
  }
  const auto t = permutation_test(group, group, statistic::mean_confidence(), 4000, 9, 1);
  CHECK(t.observed_stat == doctest::Approx(0.0));
  CHECK(t.p_value > 0.9);
  CHECK(t.p_value <= 1.0);
}

TEST_CASE("permutation p matches exhaustive enumeration for 3 vs 3") {
  const std::vector<EvalSample> a = {{90, 0.90, true}, {84, 0.84, true}, {70, 0.70, true}};
  const std::vector<EvalSample> b = {{60, 0.60, true}, {60, 0.60, true}, {31, 0.31, true}};

  std::vector<EvalSample> pooled;
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto mean_conf = [](std::span<const EvalSample> s) {
    double sum = 0;
    for (const auto& x : s) sum += x.conf_norm;
    return sum / static_cast<double>(s.size());
  };
  const double observed = mean_conf(a) - mean_conf(b);

  // All C(6,3) = 20 label splits.
  std::size_t exceed = 0;
  std::size_t total = 0;
  for (int mask = 0; mask < 64; ++mask) {
    if (__builtin_popcount(mask) != 3) continue;
    std::vector<EvalSample> ga;
    std::vector<EvalSample> gb;
    for (int i = 0; i < 6; ++i) {
      ((mask >> i) & 1 ? ga : gb).push_back(pooled[i]);
    }
    ++total;
    if (std::abs(mean_conf(ga) - mean_conf(gb)) >= std::abs(observed) - 1e-12) ++exceed;
  }
  CHECK(total == 20);
  const double exact = static_cast<double>(exceed) / static_cast<double>(total);

  const auto t = permutation_test(a, b, statistic::mean_confidence(), 10000, 4, 1);
  CHECK(std::abs(t.p_value - exact) <= 0.02);
  CHECK(t.p_value >= 1.0 / 10001);
  CHECK(t.p_value <= 1.0);
}

TEST_CASE("bonferroni adjustment is multiplicative and capped") {
  CHECK(bonferroni(0.02, 4) == doctest::Approx(0.08));
  CHECK(bonferroni(0.6, 4) == doctest::Approx(1.0));
  CHECK(bonferroni(0.03, 1) == doctest::Approx(0.03));

  const std::vector<EvalSample> a = {{90, 0.9, true}, {80, 0.8, true}, {70, 0.7, true}};
  const std::vector<EvalSample> b = {{10, 0.1, true}, {20, 0.2, true}, {30, 0.3, true}};
  const auto t = permutation_test(a, b, statistic::mean_confidence(), 1000, 2, 5);
  CHECK(t.p_adjusted == doctest::Approx(std::min(1.0, 5.0 * t.p_value)));
}
