#include "confscale/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>
#include <vector>

#include "confscale/sdt.hpp"

namespace confscale {

namespace {

// splitmix64 finalizer; used only to spread (seed, index) into engine seeds.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
  return Rng(mix64(mix64(seed) ^ (index + 1) * 0xD6E8FEB86659FD93ULL));
}

double Rng::uniform01() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
  auto lo = static_cast<std::uint64_t>(m);
  if (lo < n) {
    const std::uint64_t t = (0 - n) % n;
    while (lo < t) {
      m = static_cast<unsigned __int128>(next_u64()) * n;
      lo = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::normal() { return normal_inv_cdf(uniform01()); }

namespace statistic {

Statistic mean_confidence() {
  return {"mean_confidence", [](std::span<const EvalSample> s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            double sum = 0;
            for (const auto& x : s) sum += x.conf_norm;
            return sum / static_cast<double>(s.size());
          }};
}

Statistic accuracy() {
  return {"accuracy", [](std::span<const EvalSample> s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            double sum = 0;
            for (const auto& x : s) sum += x.correct ? 1.0 : 0.0;
            return sum / static_cast<double>(s.size());
          }};
}

Statistic ece_stat(int bins, BinStrategy strategy) {
  std::string name = std::string("ece_b") + std::to_string(bins) + "_" + to_string(strategy);
  return {std::move(name), [bins, strategy](std::span<const EvalSample> s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return ece(s, bins, strategy);
          }};
}

Statistic auroc_stat() {
  return {"auroc", [](std::span<const EvalSample> s) { return auroc(s); }};
}

Statistic meta_d_stat(double threshold) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "meta_d_t%g", threshold);
  std::string name = buf;
  return {std::move(name), [threshold](std::span<const EvalSample> s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            try {
              return estimate_sdt(s, threshold).meta_d;
            } catch (const NoConvergence&) {
              return std::nullopt;
            }
          }};
}

}  // namespace statistic

namespace {

// Contiguous index chunks over [0, n); every unit writes only its own slots,
// so the merge is just the output vector itself. The first exception thrown
// by any chunk is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, n > 0 ? (n + 1023) / 1024 : 1);
  if (workers <= 1) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::mutex error_mu;
  std::exception_ptr error;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, &error_mu, &error, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

constexpr std::size_t kMaxRedrawsPerResample = 1000;

}  // namespace

ConfidenceInterval bootstrap_ci(std::span<const EvalSample> samples, const Statistic& statistic,
                                std::size_t n_resamples, double level, std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("bootstrap_ci: empty input");
  if (n_resamples == 0) throw std::invalid_argument("bootstrap_ci: n_resamples must be positive");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: bad level");

  const auto point = statistic.fn(samples);
  if (!point) throw std::invalid_argument("bootstrap_ci: statistic undefined on the full sample");

  const std::size_t n = samples.size();
  std::vector<double> stats(n_resamples);
  std::atomic<std::size_t> redraws{0};
  std::atomic<bool> exhausted{false};

  parallel_for(n_resamples, [&](std::size_t begin, std::size_t end) {
    std::vector<EvalSample> resample(n);
    std::size_t local_redraws = 0;
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = Rng::substream(seed, i);
      std::optional<double> value;
      for (std::size_t attempt = 0; attempt < kMaxRedrawsPerResample; ++attempt) {
        for (std::size_t k = 0; k < n; ++k) resample[k] = samples[rng.below(n)];
        value = statistic.fn(resample);
        if (value) break;
        ++local_redraws;
      }
      if (!value) {
        exhausted = true;
        return;
      }
      stats[i] = *value;
    }
    redraws += local_redraws;
  });

  if (exhausted || redraws > n_resamples / 100) {
    throw StatisticUndefinedTooOften("bootstrap_ci: statistic undefined on >1% of resamples");
  }

  std::sort(stats.begin(), stats.end());
  const auto quantile = [&](double q) {
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n_resamples)));
    rank = std::clamp<std::size_t>(rank, 1, n_resamples);
    return stats[rank - 1];
  };

  ConfidenceInterval ci;
  ci.statistic = statistic.name;
  ci.point = *point;
  ci.lo = quantile((1.0 - level) / 2.0);
  ci.hi = quantile((1.0 + level) / 2.0);
  ci.level = level;
  ci.n_resamples = n_resamples;
  ci.seed = seed;
  ci.n_redraws = redraws;
  return ci;
}

double bonferroni(double p_value, std::size_t m_comparisons) {
  return std::min(1.0, p_value * static_cast<double>(std::max<std::size_t>(1, m_comparisons)));
}

TestResult permutation_test(std::span<const EvalSample> group_a,
                            std::span<const EvalSample> group_b, const Statistic& statistic,
                            std::size_t n_permutations, std::uint64_t seed,
                            std::size_t m_comparisons) {
  if (group_a.empty() || group_b.empty()) {
    throw std::invalid_argument("permutation_test: empty input");
  }
  const auto stat_a = statistic.fn(group_a);
  const auto stat_b = statistic.fn(group_b);
  if (!stat_a || !stat_b) {
    throw std::invalid_argument("permutation_test: statistic undefined on a group");
  }
  const double observed = *stat_a - *stat_b;

  std::vector<EvalSample> pooled;
  pooled.reserve(group_a.size() + group_b.size());
  pooled.insert(pooled.end(), group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  const std::size_t n_a = group_a.size();
  const std::size_t n_total = pooled.size();

  std::vector<std::uint8_t> exceed(n_permutations, 0);
  std::atomic<bool> undefined_too_often{false};

  parallel_for(n_permutations, [&](std::size_t begin, std::size_t end) {
    std::vector<EvalSample> local = pooled;
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = Rng::substream(seed, i);
      std::optional<double> diff;
      for (std::size_t attempt = 0; attempt < kMaxRedrawsPerResample; ++attempt) {
        // Partial Fisher-Yates: the first n_a slots become group A.
        for (std::size_t k = 0; k < n_a; ++k) {
          const std::size_t j = k + rng.below(n_total - k);
          std::swap(local[k], local[j]);
        }
        const auto a = statistic.fn(std::span<const EvalSample>(local.data(), n_a));
        const auto b =
            statistic.fn(std::span<const EvalSample>(local.data() + n_a, n_total - n_a));
        if (a && b) {
          diff = *a - *b;
          break;
        }
      }
      if (!diff) {
        undefined_too_often = true;
        return;
      }
      // Tolerance keeps exact ties (common with discrete confidences) counted
      // as "at least as extreme" despite summation-order rounding.
      const double tie_eps = 1e-12 * std::max(1.0, std::abs(observed));
      exceed[i] = std::abs(*diff) >= std::abs(observed) - tie_eps ? 1 : 0;
    }
  });

  if (undefined_too_often) {
    throw StatisticUndefinedTooOften("permutation_test: statistic undefined on permuted groups");
  }

  std::size_t count = 0;
  for (std::uint8_t e : exceed) count += e;

  TestResult t;
  t.observed_stat = observed;
  t.n_permutations = n_permutations;
  t.seed = seed;
  t.p_value = (1.0 + static_cast<double>(count)) / (static_cast<double>(n_permutations) + 1.0);
  t.p_adjusted = bonferroni(t.p_value, m_comparisons);
  return t;
}

}  // namespace confscale
