#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "confscale/scale.hpp"
#include "confscale/task.hpp"

namespace confscale {

/// Generative SDT observer: equal-variance Gaussian evidence at +-d/2,
/// confidence cutpoints on |evidence|, optional metacognitive noise and
/// round-number anchoring.
struct SynthParams {
  double d = 2.0;
  std::vector<double> criteria;  // strictly increasing, nonnegative
  double anchor_prob = 0.0;      // probability of snapping to a multiple of 5
  double noise_sd = 0.0;         // sd of noise added to |evidence| before rating
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthDraw {
  bool correct = false;
  int confidence = 0;  // scale units, in [lower, upper]
};

/// Fully determined by (task_id, params.seed).
SynthDraw synth_draw(std::string_view task_id, const ScaleSpec& scale, const SynthParams& params);

/// Conforming response text in the prompt's output format, with the answer
/// right or wrong according to the drawn correctness.
std::string synth_respond(const TaskInstance& task, const ScaleSpec& scale,
                          const SynthParams& params);

std::vector<double> uniform_criteria(std::size_t count, double lo, double hi);

/// Deterministic task list for simulation runs ("synth-000001", ...).
std::vector<TaskInstance> make_synth_tasks(std::size_t count,
                                           TaskKind kind = TaskKind::MultipleChoice);

}  // namespace confscale
