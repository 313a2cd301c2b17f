#pragma once

#include <string>

#include "confscale/scale.hpp"
#include "confscale/task.hpp"

namespace confscale {

enum class ParseStatus { Ok, NonConforming };

enum class NonConformReason {
  MissingAnswer,
  MissingConfidence,
  NonInteger,
  RangeValued,
  Ambiguous,
};

const char* to_string(NonConformReason reason);

struct ParsedResponse {
  std::string answer_text;
  long long confidence_raw = 0;  // valid only when status == Ok
  ParseStatus status = ParseStatus::NonConforming;
  NonConformReason reason = NonConformReason::MissingAnswer;
};

/// Extracts the last "Answer:"/"Final Answer:" line and the last
/// "Confidence:" line from arbitrary model text. The confidence must be a
/// bare integer token; decimals, ranges (hyphen or unicode dash), hedges and
/// missing fields produce a typed NonConforming reason. Never throws.
ParsedResponse parse_response(const std::string& text, const ScaleSpec& scale);

enum class Grade { Correct, Incorrect, Ungradable };

/// MultipleChoice: case-insensitive letter match after stripping punctuation.
/// FreeNumeric: numeric equality after stripping separators/currency, with
/// relative tolerance 1e-9. Requires parsed.status == Ok.
Grade grade_answer(const ParsedResponse& parsed, const TaskInstance& task);

}  // namespace confscale
