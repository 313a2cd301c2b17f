#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace confscale {

enum class ScaleFamily { Granularity, Boundary, NonStandard, Baseline };

const char* to_string(ScaleFamily family);

/// An integer confidence range [lower, upper] with its condition-family tag.
/// Construct through make(); the constructor-level invariants (lower < upper,
/// width >= 5) are enforced there.
struct ScaleSpec {
  int lower = 0;
  int upper = 100;
  ScaleFamily family = ScaleFamily::Baseline;
  std::string label;  // renders deterministically as "[lower,upper]"

  static ScaleSpec make(int lower, int upper, ScaleFamily family);

  int width() const { return upper - lower; }
};

/// Linear map of a raw integer report onto [0,1]: (c - l) / (u - l).
/// Exact at the endpoints; c outside [l,u] maps outside [0,1].
double normalize(long long confidence, const ScaleSpec& scale);

enum class RangeKind { InRange, SoftOutOfRange, Violation };

struct ReportClassification {
  RangeKind kind = RangeKind::InRange;
  long long distance = 0;  // scale units outside [l,u]; 0 when in range
};

/// In range when l <= c <= u; otherwise distance = max(l-c, c-u) and the
/// report is a Violation iff distance > 5% of the scale width.
ReportClassification classify_report(long long confidence, const ScaleSpec& scale);

int clamp_to_scale(long long confidence, const ScaleSpec& scale);

/// The 13 built-in conditions in stable order: granularity [0,5]..[0,50],
/// the shared [0,100] baseline, the three boundary shifts, and the five
/// non-standard ranges.
const std::vector<ScaleSpec>& builtin_conditions();

std::optional<ScaleSpec> find_condition(const std::string& label);

/// Accepts a builtin label or a custom "[l,u]" literal.
ScaleSpec resolve_scale_label(const std::string& label);

std::string conditions_catalog_json();

}  // namespace confscale
