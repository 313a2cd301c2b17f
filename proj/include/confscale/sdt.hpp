#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>

#include "confscale/sample.hpp"

namespace confscale {

inline constexpr double kThresholdDefault = 0.9;
inline constexpr double kThresholdAlt = 0.95;

double normal_cdf(double x);
double normal_pdf(double x);

/// Inverse standard normal CDF, |Phi(result) - p| <= 1e-9 over
/// p in [1e-12, 1-1e-12]. Throws std::domain_error outside (0,1).
double normal_inv_cdf(double p);

/// 2x2 counts of (correct/incorrect) x (high/low confidence) at a threshold.
/// High confidence means conf_norm strictly greater than the threshold.
struct Type2Table {
  long n_hit = 0;   // correct   & high confidence
  long n_miss = 0;  // correct   & low confidence
  long n_fa = 0;    // incorrect & high confidence
  long n_cr = 0;    // incorrect & low confidence
  double threshold = kThresholdDefault;
};

Type2Table build_type2_table(std::span<const EvalSample> samples, double threshold);

struct Type2Rates {
  double hr2 = 0;
  double far2 = 0;
};

/// Log-linear correction: 0.5 added to every cell, so both rates are
/// strictly inside (0,1) even for empty rows.
Type2Rates corrected_rates(const Type2Table& table);

/// d' = 2 * z(acc) for an unbiased equal-variance yes/no observer, with acc
/// clamped to [1/(2n), 1 - 1/(2n)] (epsilon 1e-4 when n is unknown).
double d_prime_from_accuracy(double accuracy, std::optional<std::size_t> n_eff = std::nullopt);

/// Type-2 rates of the SDT-ideal observer: equal-variance Gaussian evidence
/// at +-d/2, unbiased type-1 criterion at 0, high confidence iff |x| > c2.
Type2Rates ideal_type2_rates(double d, double c2);

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The d whose ideal observer reproduces the observed corrected type-2 rates
/// at some criterion c2 >= 0. Antisymmetric: hr2 < far2 gives the negated fit
/// of the swapped rates; hr2 == far2 gives 0. Residual <= 1e-6 in both rates.
double fit_meta_d(double hr2, double far2);

struct SdtEstimate {
  double d_prime = 0;
  double meta_d = 0;
  std::optional<double> m_ratio;  // absent when d_prime <= 1e-6
  double threshold = kThresholdDefault;
  double hr2 = 0;
  double far2 = 0;
};

SdtEstimate estimate_sdt(std::span<const EvalSample> samples, double threshold,
                         double accuracy, std::optional<std::size_t> n_eff);

/// Convenience overload: accuracy and n_eff taken from the samples.
SdtEstimate estimate_sdt(std::span<const EvalSample> samples,
                         double threshold = kThresholdDefault);

}  // namespace confscale
