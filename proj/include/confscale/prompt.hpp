#pragma once

#include <string>

#include "confscale/scale.hpp"
#include "confscale/task.hpp"

namespace confscale {

/// Standardized zero-shot prompt: task instruction, confidence instruction
/// with the scale's bounds anchored to "no confidence at all" / "absolute
/// certainty", and the strict output-format block. Byte-deterministic.
std::string render_prompt(const TaskInstance& task, const ScaleSpec& scale);

/// The confidence instruction sentence alone, as used inside render_prompt.
std::string confidence_instruction(const ScaleSpec& scale);

}  // namespace confscale
