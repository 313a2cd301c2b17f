#pragma once

#include <string>
#include <vector>

namespace confscale {

enum class TaskKind { MultipleChoice, FreeNumeric };

struct Choice {
  std::string letter;
  std::string text;
};

/// One graded trial's question: multiple-choice with lettered options, or a
/// free numeric answer.
struct TaskInstance {
  std::string id;
  TaskKind kind = TaskKind::MultipleChoice;
  std::string question;
  std::vector<Choice> choices;  // MultipleChoice only
  std::string gold;             // answer letter, or canonical numeric string
};

}  // namespace confscale
