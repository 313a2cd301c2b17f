#include "confscale/synth.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "confscale/stats.hpp"

namespace confscale {

void SynthParams::validate() const {
  if (d < 0) throw std::invalid_argument("SynthParams: d must be nonnegative");
  if (criteria.empty()) throw std::invalid_argument("SynthParams: criteria must be non-empty");
  double prev = -1;
  for (double c : criteria) {
    if (c < 0 || c <= prev) {
      throw std::invalid_argument("SynthParams: criteria must be strictly increasing and >= 0");
    }
    prev = c;
  }
  if (anchor_prob < 0 || anchor_prob > 1) {
    throw std::invalid_argument("SynthParams: anchor_prob must lie in [0,1]");
  }
  if (noise_sd < 0) throw std::invalid_argument("SynthParams: noise_sd must be nonnegative");
}

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Nearest multiple of 5 inside [l,u]; a width >= 5 guarantees one of the two
// neighbours is in range.
int snap_to_round(int value, const ScaleSpec& scale) {
  const int down = value - (((value % 5) + 5) % 5);
  const int up = down + 5;
  const bool down_ok = down >= scale.lower && down <= scale.upper;
  const bool up_ok = up >= scale.lower && up <= scale.upper;
  if (down_ok && up_ok) return (value - down <= up - value) ? down : up;
  if (down_ok) return down;
  return up;
}

}  // namespace

SynthDraw synth_draw(std::string_view task_id, const ScaleSpec& scale, const SynthParams& params) {
  params.validate();
  Rng rng = Rng::substream(params.seed, fnv1a64(task_id));

  const double stimulus = rng.below(2) == 0 ? -1.0 : 1.0;
  const double evidence = stimulus * 0.5 * params.d + rng.normal();
  const bool correct = (evidence >= 0) == (stimulus > 0);

  // Metacognitive noise perturbs the rating evidence; reflection at zero
  // keeps it on the same half-line the criteria live on.
  double rating_evidence = std::abs(evidence);
  if (params.noise_sd > 0) {
    rating_evidence = std::abs(rating_evidence + params.noise_sd * rng.normal());
  }

  std::size_t level = 0;
  for (double c : params.criteria) {
    if (rating_evidence > c) ++level;
  }
  const double frac = static_cast<double>(level) / static_cast<double>(params.criteria.size());
  int confidence = scale.lower + static_cast<int>(std::lround(frac * scale.width()));

  if (rng.uniform01() < params.anchor_prob) confidence = snap_to_round(confidence, scale);
  return SynthDraw{correct, confidence};
}

std::string synth_respond(const TaskInstance& task, const ScaleSpec& scale,
                          const SynthParams& params) {
  const SynthDraw draw = synth_draw(task.id, scale, params);

  std::string answer;
  if (task.kind == TaskKind::MultipleChoice) {
    answer = task.gold;
    if (!draw.correct) {
      for (const auto& choice : task.choices) {
        if (choice.letter != task.gold) {
          answer = choice.letter;
          break;
        }
      }
    }
    return "Answer: " + answer + "\nConfidence: " + std::to_string(draw.confidence);
  }
  if (draw.correct) {
    answer = task.gold;
  } else {
    answer = std::to_string(std::strtod(task.gold.c_str(), nullptr) + 1);
  }
  return "Solution: simulated observer trial\nFinal Answer: " + answer +
         "\nConfidence: " + std::to_string(draw.confidence);
}

std::vector<double> uniform_criteria(std::size_t count, double lo, double hi) {
  if (count == 0) throw std::invalid_argument("uniform_criteria: count must be positive");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = lo;
    return v;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) v[i] = lo + step * static_cast<double>(i);
  return v;
}

std::vector<TaskInstance> make_synth_tasks(std::size_t count, TaskKind kind) {
  std::vector<TaskInstance> tasks;
  tasks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%06zu", i);
    TaskInstance t;
    t.id = id;
    t.kind = kind;
    t.question = std::string("Synthetic trial ") + id;
    if (kind == TaskKind::MultipleChoice) {
      t.choices = {{"A", "option a"}, {"B", "option b"}};
      t.gold = "A";
    } else {
      t.gold = "42";
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

}  // namespace confscale
