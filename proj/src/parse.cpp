#include "confscale/parse.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <string_view>
#include <vector>

namespace confscale {

const char* to_string(NonConformReason reason) {
  switch (reason) {
    case NonConformReason::MissingAnswer: return "missing_answer";
    case NonConformReason::MissingConfidence: return "missing_confidence";
    case NonConformReason::NonInteger: return "non_integer";
    case NonConformReason::RangeValued: return "range_valued";
    case NonConformReason::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Case-insensitive "label:" prefix match; returns the rest of the line.
bool strip_label(std::string_view line, std::string_view label, std::string_view* rest) {
  if (line.size() < label.size() + 1) return false;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(line[i])) != label[i]) return false;
  }
  std::string_view after = line.substr(label.size());
  after = trim(after);
  if (after.empty() || after.front() != ':') return false;
  after.remove_prefix(1);
  *rest = trim(after);
  return true;
}

bool is_integer_token(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

bool is_plain_number(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  bool digits = false;
  bool dot = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

// Range separators: hyphen, double hyphen, unicode en/em dash, "to".
bool split_range(std::string_view s, std::string_view* left, std::string_view* right) {
  static constexpr std::string_view separators[] = {"\xE2\x80\x93", "\xE2\x80\x94", "--", "-",
                                                    " to "};
  for (std::string_view sep : separators) {
    // Search past position 0 so a leading sign is not taken as a separator.
    const std::size_t pos = s.find(sep, 1);
    if (pos == std::string_view::npos) continue;
    *left = trim(s.substr(0, pos));
    *right = trim(s.substr(pos + sep.size()));
    if (!left->empty() && !right->empty()) return true;
  }
  return false;
}

}  // namespace

ParsedResponse parse_response(const std::string& text, const ScaleSpec& /*scale*/) {
  std::string_view answer_field;
  std::string_view confidence_field;
  bool saw_answer = false;
  bool saw_confidence = false;

  std::string_view rest = text;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = trim(rest.substr(0, nl));
    rest = (nl == std::string_view::npos) ? std::string_view{} : rest.substr(nl + 1);

    std::string_view field;
    if (strip_label(line, "final answer", &field) || strip_label(line, "answer", &field)) {
      answer_field = field;
      saw_answer = true;
    } else if (strip_label(line, "confidence", &field)) {
      confidence_field = field;
      saw_confidence = true;
    }
  }

  ParsedResponse r;
  if (!saw_answer || answer_field.empty()) {
    r.reason = NonConformReason::MissingAnswer;
    return r;
  }
  r.answer_text = std::string(answer_field);
  if (!saw_confidence || confidence_field.empty()) {
    r.reason = NonConformReason::MissingConfidence;
    return r;
  }

  if (is_integer_token(confidence_field)) {
    errno = 0;
    char* end = nullptr;
    const std::string token(confidence_field);
    const long long value = std::strtoll(token.c_str(), &end, 10);
    if (errno != 0 || end != token.c_str() + token.size()) {
      r.reason = NonConformReason::Ambiguous;
      return r;
    }
    r.confidence_raw = value;
    r.status = ParseStatus::Ok;
    return r;
  }

  std::string_view left;
  std::string_view right;
  if (split_range(confidence_field, &left, &right) && is_plain_number(left) &&
      is_plain_number(right)) {
    r.reason = NonConformReason::RangeValued;
    return r;
  }
  if (is_plain_number(confidence_field)) {
    r.reason = NonConformReason::NonInteger;
    return r;
  }
  r.reason = NonConformReason::Ambiguous;
  return r;
}

namespace {

bool is_strippable_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::string_view strip_punct_and_space(std::string_view s) {
  while (!s.empty() && (is_space(s.front()) || is_strippable_punct(s.front()))) s.remove_prefix(1);
  while (!s.empty() && (is_space(s.back()) || is_strippable_punct(s.back()))) s.remove_suffix(1);
  return s;
}

// Leading option letter, when the text is a single letter or a letter
// followed by a non-alphanumeric (e.g. "B", "b.", "B) London").
std::optional<char> extract_letter(std::string_view raw) {
  const std::string_view s = strip_punct_and_space(raw);
  if (s.empty()) return std::nullopt;
  const char first = s.front();
  if (!std::isalpha(static_cast<unsigned char>(first))) return std::nullopt;
  if (s.size() > 1 && std::isalnum(static_cast<unsigned char>(s[1]))) return std::nullopt;
  return static_cast<char>(std::toupper(static_cast<unsigned char>(first)));
}

std::optional<double> parse_numeric(std::string_view raw) {
  static constexpr std::string_view strip[] = {",", " ", "\t", "$", "\xE2\x82\xAC", "\xC2\xA3",
                                               "\xC2\xA5"};
  std::string cleaned(trim(raw));
  for (std::string_view token : strip) {
    std::size_t pos = 0;
    while ((pos = cleaned.find(token, pos)) != std::string::npos) {
      cleaned.erase(pos, token.size());
    }
  }
  while (!cleaned.empty() && cleaned.back() == '.') cleaned.pop_back();
  if (cleaned.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(cleaned.c_str(), &end);
  if (errno != 0 || end != cleaned.c_str() + cleaned.size()) return std::nullopt;
  return value;
}

}  // namespace

Grade grade_answer(const ParsedResponse& parsed, const TaskInstance& task) {
  if (task.kind == TaskKind::MultipleChoice) {
    const auto answer = extract_letter(parsed.answer_text);
    const auto gold = extract_letter(task.gold);
    if (!answer || !gold) return Grade::Ungradable;
    return *answer == *gold ? Grade::Correct : Grade::Incorrect;
  }
  const auto answer = parse_numeric(parsed.answer_text);
  const auto gold = parse_numeric(task.gold);
  if (!answer || !gold) return Grade::Ungradable;
  const double tol = 1e-9 * std::max({1.0, std::abs(*answer), std::abs(*gold)});
  return std::abs(*answer - *gold) <= tol ? Grade::Correct : Grade::Incorrect;
}

}  // namespace confscale
