#pragma once

#include "confscale/scale.hpp"

namespace confscale {

/// One graded trial: clamped raw confidence, its normalized value, and the
/// correctness bit.
struct EvalSample {
  int conf_raw = 0;      // scale units, post-clamp
  double conf_norm = 0;  // normalize(conf_raw) in [0,1]
  bool correct = false;
};

inline EvalSample make_sample(long long conf_raw, const ScaleSpec& scale, bool correct) {
  const int clamped = clamp_to_scale(conf_raw, scale);
  return EvalSample{clamped, normalize(clamped, scale), correct};
}

}  // namespace confscale
