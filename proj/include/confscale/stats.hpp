#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

#include "confscale/metrics.hpp"
#include "confscale/sample.hpp"

namespace confscale {

/// Deterministic, platform-portable randomness: the mt19937_64 engine is
/// bit-exactly specified by the standard; every distribution on top of it is
/// implemented here because std:: distributions are not portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent substream for (seed, index); resample loops draw one per
  /// index so results do not depend on thread count.
  static Rng substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  double uniform01();

  /// Unbiased integer in [0, n), Lemire multiply-with-rejection.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the inverse CDF.
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct Statistic {
  std::string name;
  // Empty optional = undefined on this sample set (e.g. one-class AUROC).
  std::function<std::optional<double>(std::span<const EvalSample>)> fn;
};

namespace statistic {
Statistic mean_confidence();
Statistic accuracy();
Statistic ece_stat(int bins, BinStrategy strategy);
Statistic auroc_stat();
Statistic meta_d_stat(double threshold);
}  // namespace statistic

struct ConfidenceInterval {
  std::string statistic;
  double point = 0;
  double lo = 0;
  double hi = 0;
  double level = 0.95;
  std::size_t n_resamples = 0;
  std::uint64_t seed = 0;
  std::size_t n_redraws = 0;  // resamples redrawn because the statistic was undefined
};

struct StatisticUndefinedTooOften : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Percentile-method bootstrap over case resamples. Deterministic for a
/// fixed seed regardless of thread count. Resamples on which the statistic
/// is undefined are redrawn; more than 1% redraws raises
/// StatisticUndefinedTooOften.
ConfidenceInterval bootstrap_ci(std::span<const EvalSample> samples, const Statistic& statistic,
                                std::size_t n_resamples = 10000, double level = 0.95,
                                std::uint64_t seed = 0);

struct TestResult {
  double p_value = 1;
  double p_adjusted = 1;
  std::size_t n_permutations = 0;
  double observed_stat = 0;
  std::uint64_t seed = 0;
};

double bonferroni(double p_value, std::size_t m_comparisons);

/// Two-sided label-shuffling permutation test of statistic(a) - statistic(b),
/// add-one p estimator, Bonferroni adjustment over m_comparisons.
TestResult permutation_test(std::span<const EvalSample> group_a,
                            std::span<const EvalSample> group_b, const Statistic& statistic,
                            std::size_t n_permutations = 10000, std::uint64_t seed = 0,
                            std::size_t m_comparisons = 1);

}  // namespace confscale
