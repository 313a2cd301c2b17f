#include "confscale/scale.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace confscale {

const char* to_string(ScaleFamily family) {
  switch (family) {
    case ScaleFamily::Granularity: return "granularity";
    case ScaleFamily::Boundary: return "boundary";
    case ScaleFamily::NonStandard: return "nonstandard";
    case ScaleFamily::Baseline: return "baseline";
  }
  return "unknown";
}

ScaleSpec ScaleSpec::make(int lower, int upper, ScaleFamily family) {
  if (lower >= upper) {
    throw std::invalid_argument("ScaleSpec: lower must be < upper");
  }
  if (upper - lower < 5) {
    throw std::invalid_argument("ScaleSpec: width must be >= 5");
  }
  ScaleSpec s;
  s.lower = lower;
  s.upper = upper;
  s.family = family;
  s.label = "[" + std::to_string(lower) + "," + std::to_string(upper) + "]";
  return s;
}

double normalize(long long confidence, const ScaleSpec& scale) {
  return static_cast<double>(confidence - scale.lower) / static_cast<double>(scale.width());
}

ReportClassification classify_report(long long confidence, const ScaleSpec& scale) {
  ReportClassification r;
  r.distance = std::max<long long>({scale.lower - confidence, confidence - scale.upper, 0});
  if (r.distance == 0) {
    r.kind = RangeKind::InRange;
  } else if (static_cast<double>(r.distance) > 0.05 * scale.width()) {
    r.kind = RangeKind::Violation;
  } else {
    r.kind = RangeKind::SoftOutOfRange;
  }
  return r;
}

int clamp_to_scale(long long confidence, const ScaleSpec& scale) {
  return static_cast<int>(std::clamp<long long>(confidence, scale.lower, scale.upper));
}

const std::vector<ScaleSpec>& builtin_conditions() {
  static const std::vector<ScaleSpec> conditions = [] {
    std::vector<ScaleSpec> v;
    v.push_back(ScaleSpec::make(0, 5, ScaleFamily::Granularity));
    v.push_back(ScaleSpec::make(0, 10, ScaleFamily::Granularity));
    v.push_back(ScaleSpec::make(0, 20, ScaleFamily::Granularity));
    v.push_back(ScaleSpec::make(0, 50, ScaleFamily::Granularity));
    // [0,100] doubles as the granularity anchor and the boundary baseline.
    v.push_back(ScaleSpec::make(0, 100, ScaleFamily::Baseline));
    v.push_back(ScaleSpec::make(20, 100, ScaleFamily::Boundary));
    v.push_back(ScaleSpec::make(40, 100, ScaleFamily::Boundary));
    v.push_back(ScaleSpec::make(60, 100, ScaleFamily::Boundary));
    v.push_back(ScaleSpec::make(0, 73, ScaleFamily::NonStandard));
    v.push_back(ScaleSpec::make(14, 86, ScaleFamily::NonStandard));
    v.push_back(ScaleSpec::make(7, 79, ScaleFamily::NonStandard));
    v.push_back(ScaleSpec::make(3, 38, ScaleFamily::NonStandard));
    v.push_back(ScaleSpec::make(0, 97, ScaleFamily::NonStandard));
    return v;
  }();
  return conditions;
}

std::optional<ScaleSpec> find_condition(const std::string& label) {
  for (const auto& s : builtin_conditions()) {
    if (s.label == label) return s;
  }
  return std::nullopt;
}

ScaleSpec resolve_scale_label(const std::string& label) {
  if (auto builtin = find_condition(label)) return *builtin;
  int lower = 0;
  int upper = 0;
  char tail = 0;
  if (std::sscanf(label.c_str(), "[%d,%d%c", &lower, &upper, &tail) != 3 || tail != ']') {
    throw std::invalid_argument("not a scale label: " + label);
  }
  ScaleFamily family = ScaleFamily::NonStandard;
  if (lower == 0 && upper == 100) {
    family = ScaleFamily::Baseline;
  } else if (lower == 0) {
    family = ScaleFamily::Granularity;
  } else if (upper == 100) {
    family = ScaleFamily::Boundary;
  }
  return ScaleSpec::make(lower, upper, family);
}

std::string conditions_catalog_json() {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : builtin_conditions()) {
    arr.push_back({{"lower", s.lower},
                   {"upper", s.upper},
                   {"family", to_string(s.family)},
                   {"label", s.label}});
  }
  return arr.dump(2);
}

}  // namespace confscale
