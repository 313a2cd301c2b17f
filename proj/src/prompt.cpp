#include "confscale/prompt.hpp"

namespace confscale {

std::string confidence_instruction(const ScaleSpec& scale) {
  const std::string l = std::to_string(scale.lower);
  const std::string u = std::to_string(scale.upper);
  return "After providing your answer, rate your confidence as an integer between " + l +
         " and " + u + ", where " + l + " means no confidence at all and " + u +
         " means absolute certainty.";
}

std::string render_prompt(const TaskInstance& task, const ScaleSpec& scale) {
  const std::string l = std::to_string(scale.lower);
  const std::string u = std::to_string(scale.upper);
  const std::string conf_slot = "Confidence: <integer between " + l + " and " + u + ">";

  std::string out;
  if (task.kind == TaskKind::MultipleChoice) {
    out += "Answer the following question.\n";
    out += task.question + "\n";
    out += "Choices: ";
    for (std::size_t i = 0; i < task.choices.size(); ++i) {
      if (i > 0) out += ", ";
      out += task.choices[i].letter + ") " + task.choices[i].text;
    }
    out += "\n";
    out += confidence_instruction(scale) + "\n";
    out += "Respond in the following format only:\n";
    out += "Answer: <your answer>\n";
    out += conf_slot;
  } else {
    out += "Solve the following math problem step by step.\n";
    out += task.question + "\n";
    out += confidence_instruction(scale) + "\n";
    out += "Respond in the following format only:\n";
    out += "Solution: <your step-by-step solution>\n";
    out += "Final Answer: <numerical answer>\n";
    out += conf_slot;
  }
  return out;
}

}  // namespace confscale
