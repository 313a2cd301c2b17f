#include "confscale/sdt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace confscale {

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_pdf(double x) {
  constexpr double inv_sqrt2pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  return inv_sqrt2pi * std::exp(-0.5 * x * x);
}

namespace {

// Survival function 1 - Phi(x), accurate in the upper tail.
double normal_sf(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

// Acklam's rational approximation, ~1e-9 relative error on its own.
double inv_cdf_seed(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_inv_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_inv_cdf: p must lie in (0,1)");
  }
  double x = inv_cdf_seed(p);
  // Two Halley steps against the erfc-based CDF pin the round-trip error
  // well below the 1e-9 contract. Skipped in the far tail where exp(x^2/2)
  // would overflow; the rational seed is already adequate out there.
  constexpr double sqrt2pi = std::numbers::sqrt2 / std::numbers::inv_sqrtpi;
  for (int i = 0; i < 2 && std::abs(x) < 37.0; ++i) {
    const double err = normal_cdf(x) - p;
    const double u = err * sqrt2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

Type2Table build_type2_table(std::span<const EvalSample> samples, double threshold) {
  if (samples.empty()) throw std::invalid_argument("build_type2_table: empty input");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("build_type2_table: threshold must lie in (0,1)");
  }
  Type2Table t;
  t.threshold = threshold;
  for (const auto& s : samples) {
    const bool high = s.conf_norm > threshold;
    if (s.correct) {
      (high ? t.n_hit : t.n_miss)++;
    } else {
      (high ? t.n_fa : t.n_cr)++;
    }
  }
  return t;
}

Type2Rates corrected_rates(const Type2Table& table) {
  Type2Rates r;
  r.hr2 = (table.n_hit + 0.5) / (table.n_hit + table.n_miss + 1.0);
  r.far2 = (table.n_fa + 0.5) / (table.n_fa + table.n_cr + 1.0);
  return r;
}

double d_prime_from_accuracy(double accuracy, std::optional<std::size_t> n_eff) {
  double eps = 1e-4;
  if (n_eff && *n_eff > 0) eps = 1.0 / (2.0 * static_cast<double>(*n_eff));
  const double acc = std::clamp(accuracy, eps, 1.0 - eps);
  return 2.0 * normal_inv_cdf(acc);
}

Type2Rates ideal_type2_rates(double d, double c2) {
  const double half = 0.5 * d;
  Type2Rates r;
  r.hr2 = normal_sf(c2 - half) / normal_cdf(half);
  r.far2 = normal_sf(c2 + half) / normal_sf(half);
  return r;
}

namespace {

constexpr int kMaxIter = 200;

// far2 of the ideal observer is strictly decreasing in c2; bisect for the
// criterion reproducing the target rate at sensitivity d.
double solve_c2_for_far2(double d, double far2_target) {
  double lo = 0.0;
  double hi = 1.0;
  while (ideal_type2_rates(d, hi).far2 > far2_target && hi < 64.0) hi *= 2.0;
  for (int i = 0; i < kMaxIter && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ideal_type2_rates(d, mid).far2 > far2_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// hr2 at the far2-matching criterion, as a function of d alone.
double hr2_at_matched_far2(double d, double far2_target) {
  return ideal_type2_rates(d, solve_c2_for_far2(d, far2_target)).hr2;
}

}  // namespace

double fit_meta_d(double hr2, double far2) {
  if (!(hr2 > 0.0 && hr2 < 1.0 && far2 > 0.0 && far2 < 1.0)) {
    throw std::invalid_argument("fit_meta_d: rates must lie in (0,1); apply corrected_rates first");
  }
  if (hr2 == far2) return 0.0;
  if (hr2 < far2) return -fit_meta_d(far2, hr2);

  constexpr double d_max = 10.0;
  if (hr2_at_matched_far2(d_max, far2) < hr2) {
    throw NoConvergence("fit_meta_d: observed rates unreachable for d in [0,10]");
  }
  double lo = 0.0;  // hr2 == far2 < observed hr2 at d = 0
  double hi = d_max;
  for (int i = 0; i < kMaxIter && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hr2_at_matched_far2(mid, far2) < hr2) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SdtEstimate estimate_sdt(std::span<const EvalSample> samples, double threshold,
                         double accuracy, std::optional<std::size_t> n_eff) {
  const Type2Table table = build_type2_table(samples, threshold);
  const Type2Rates rates = corrected_rates(table);
  SdtEstimate e;
  e.threshold = threshold;
  e.hr2 = rates.hr2;
  e.far2 = rates.far2;
  e.d_prime = d_prime_from_accuracy(accuracy, n_eff);
  e.meta_d = fit_meta_d(rates.hr2, rates.far2);
  if (e.d_prime > 1e-6) e.m_ratio = e.meta_d / e.d_prime;
  return e;
}

SdtEstimate estimate_sdt(std::span<const EvalSample> samples, double threshold) {
  if (samples.empty()) throw std::invalid_argument("estimate_sdt: empty input");
  std::size_t n_correct = 0;
  for (const auto& s : samples) n_correct += s.correct ? 1 : 0;
  const double acc = static_cast<double>(n_correct) / static_cast<double>(samples.size());
  return estimate_sdt(samples, threshold, acc, samples.size());
}

}  // namespace confscale
