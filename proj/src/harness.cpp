#include "confscale/harness.hpp"

#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"

#include "confscale/parse.hpp"
#include "confscale/prompt.hpp"

namespace confscale {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

TaskInstance task_from_json(const json& j, std::size_t line_no) {
  const auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw SchemaError(line_no, std::string("missing field: ") + key);
    return j.at(key);
  };
  TaskInstance t;
  if (!need("id").is_string()) throw SchemaError(line_no, "id must be a string");
  t.id = j["id"].get<std::string>();
  if (t.id.empty()) throw SchemaError(line_no, "id must be non-empty");

  const std::string kind = need("kind").is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "mc") {
    t.kind = TaskKind::MultipleChoice;
  } else if (kind == "numeric") {
    t.kind = TaskKind::FreeNumeric;
  } else {
    throw SchemaError(line_no, "kind must be \"mc\" or \"numeric\"");
  }

  if (!need("question").is_string()) throw SchemaError(line_no, "question must be a string");
  t.question = j["question"].get<std::string>();
  if (!need("gold").is_string()) throw SchemaError(line_no, "gold must be a string");
  t.gold = j["gold"].get<std::string>();

  if (t.kind == TaskKind::MultipleChoice) {
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
      throw SchemaError(line_no, "mc task needs a non-empty choices array");
    }
    std::set<std::string> letters;
    for (const auto& c : j["choices"]) {
      if (!c.is_object() || !c.contains("letter") || !c.contains("text")) {
        throw SchemaError(line_no, "choice needs letter and text");
      }
      Choice choice{c["letter"].get<std::string>(), c["text"].get<std::string>()};
      if (!letters.insert(choice.letter).second) {
        throw SchemaError(line_no, "duplicate choice letter: " + choice.letter);
      }
      t.choices.push_back(std::move(choice));
    }
  } else {
    errno = 0;
    char* end = nullptr;
    std::strtod(t.gold.c_str(), &end);
    if (errno != 0 || end != t.gold.c_str() + t.gold.size() || t.gold.empty()) {
      throw SchemaError(line_no, "numeric task gold must parse as a number");
    }
  }
  return t;
}

}  // namespace

std::vector<TaskInstance> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("dataset not readable: " + path.string());
  std::vector<TaskInstance> tasks;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(line_no, std::string("invalid json: ") + e.what());
    }
    TaskInstance t = task_from_json(j, line_no);
    if (!seen.insert(t.id).second) throw DuplicateId(t.id);
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::string task_to_jsonl(const TaskInstance& task) {
  ordered_json j;
  j["id"] = task.id;
  j["kind"] = task.kind == TaskKind::MultipleChoice ? "mc" : "numeric";
  j["question"] = task.question;
  if (task.kind == TaskKind::MultipleChoice) {
    ordered_json choices = ordered_json::array();
    for (const auto& c : task.choices) {
      choices.push_back({{"letter", c.letter}, {"text", c.text}});
    }
    j["choices"] = std::move(choices);
  }
  j["gold"] = task.gold;
  return j.dump();
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config not readable: " + path.string());
  json j = json::parse(in);
  RunConfig c;
  if (j.contains("dataset_path")) c.dataset_path = j["dataset_path"].get<std::string>();
  if (j.contains("scale_labels")) c.scale_labels = j["scale_labels"].get<std::vector<std::string>>();
  if (j.contains("adapter")) c.adapter_descriptor = j["adapter"].get<std::string>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("max_parallel")) c.max_parallel = j["max_parallel"].get<int>();
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("dataset_name")) c.dataset_name = j["dataset_name"].get<std::string>();
  if (j.contains("fixed_timestamp")) c.fixed_timestamp = j["fixed_timestamp"].get<std::string>();
  if (c.max_parallel < 1) throw std::invalid_argument("max_parallel must be >= 1");
  return c;
}

std::string record_to_jsonl(const ResponseRecord& r) {
  ordered_json j;
  j["task_id"] = r.task_id;
  j["scale"] = r.scale_label;
  j["prompt"] = r.prompt_text;
  j["raw"] = r.raw_output;
  j["status"] = r.status;
  if (r.confidence) {
    j["confidence"] = *r.confidence;
  } else {
    j["confidence"] = nullptr;
  }
  if (r.correct) {
    j["correct"] = *r.correct;
  } else {
    j["correct"] = nullptr;
  }
  j["ts"] = r.timestamp;
  // Raw model output may hold invalid UTF-8; replace instead of throwing.
  return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

ResponseRecord record_from_jsonl(const std::string& line) {
  const json j = json::parse(line);
  ResponseRecord r;
  r.task_id = j.at("task_id").get<std::string>();
  r.scale_label = j.at("scale").get<std::string>();
  r.prompt_text = j.at("prompt").get<std::string>();
  r.raw_output = j.at("raw").get<std::string>();
  r.status = j.at("status").get<std::string>();
  if (j.contains("confidence") && !j["confidence"].is_null()) {
    r.confidence = j["confidence"].get<long long>();
  }
  if (j.contains("correct") && !j["correct"].is_null()) {
    r.correct = j["correct"].get<int>();
  }
  r.timestamp = j.at("ts").get<std::string>();
  return r;
}

std::string now_iso8601_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

// Scans an existing artifact for completed task ids. A trailing partial or
// corrupt line (an interrupted write) is truncated away so the rerun can
// append cleanly.
std::set<std::string> scan_artifact(const std::filesystem::path& path) {
  std::set<std::string> done;
  if (!std::filesystem::exists(path)) return done;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::uintmax_t valid_bytes = 0;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // no trailing '\n': a partial write, drop it
    try {
      done.insert(record_from_jsonl(line).task_id);
    } catch (const std::exception&) {
      break;
    }
    valid_bytes += line.size() + 1;
  }
  in.close();
  if (valid_bytes < std::filesystem::file_size(path)) {
    std::filesystem::resize_file(path, valid_bytes);
  }
  return done;
}

ResponseRecord build_record(const TaskInstance& task, const ScaleSpec& scale,
                            const std::string& prompt, ModelAdapter& adapter,
                            const std::string& timestamp) {
  ResponseRecord r;
  r.task_id = task.id;
  r.scale_label = scale.label;
  r.prompt_text = prompt;
  r.timestamp = timestamp;
  try {
    r.raw_output = adapter.complete(task.id, prompt);
  } catch (const std::exception& e) {
    r.status = std::string("adapter_error:") + e.what();
    return r;
  }
  const ParsedResponse parsed = parse_response(r.raw_output, scale);
  if (parsed.status != ParseStatus::Ok) {
    r.status = std::string("nonconforming:") + to_string(parsed.reason);
    return r;
  }
  r.status = "ok";
  r.confidence = parsed.confidence_raw;
  const Grade grade = grade_answer(parsed, task);
  if (grade != Grade::Ungradable) r.correct = grade == Grade::Correct ? 1 : 0;
  return r;
}

}  // namespace

RunResult run_condition(const RunConfig& config, std::span<const TaskInstance> tasks,
                        const ScaleSpec& scale, ModelAdapter& adapter) {
  if (config.max_parallel < 1) throw std::invalid_argument("max_parallel must be >= 1");
  const std::string dataset =
      config.dataset_name.value_or(config.dataset_path.stem().string());
  const std::filesystem::path dir = config.output_dir / dataset;
  std::filesystem::create_directories(dir);
  const std::filesystem::path artifact = dir / (scale.label + ".jsonl");

  const std::set<std::string> done = scan_artifact(artifact);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!done.count(tasks[i].id)) todo.push_back(i);
  }

  RunResult result;
  result.artifact = artifact;
  result.n_skipped = tasks.size() - todo.size();
  if (todo.empty()) return result;

  std::ofstream out(artifact, std::ios::app | std::ios::binary);
  if (!out) throw std::runtime_error("artifact not writable: " + artifact.string());

  // Workers pull the next todo index; finished records are flushed strictly
  // in task order so artifacts are byte-stable under any thread timing.
  std::mutex mu;
  std::map<std::size_t, ResponseRecord> ready;
  std::size_t next_claim = 0;
  std::size_t next_write = 0;
  std::size_t n_errors = 0;
  std::exception_ptr io_error;

  const auto worker = [&] {
    for (;;) {
      std::size_t slot;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next_claim >= todo.size() || io_error) return;
        slot = next_claim++;
      }
      const TaskInstance& task = tasks[todo[slot]];
      const std::string timestamp = config.fixed_timestamp.value_or(now_iso8601_utc());
      const std::string prompt = render_prompt(task, scale);
      ResponseRecord record = build_record(task, scale, prompt, adapter, timestamp);

      std::unique_lock<std::mutex> lock(mu);
      if (record.status.rfind("adapter_error:", 0) == 0) ++n_errors;
      ready.emplace(slot, std::move(record));
      while (!ready.empty() && ready.begin()->first == next_write) {
        try {
          out << record_to_jsonl(ready.begin()->second) << '\n';
          out.flush();
          if (!out) throw std::runtime_error("artifact write failed: " + artifact.string());
        } catch (...) {
          io_error = std::current_exception();
          return;
        }
        ready.erase(ready.begin());
        ++next_write;
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.max_parallel), todo.size());
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (io_error) std::rethrow_exception(io_error);

  result.n_new = todo.size();
  result.n_adapter_errors = n_errors;
  return result;
}

ArtifactData load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("artifact not readable: " + path.string());
  std::optional<ScaleSpec> scale;
  ArtifactData data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ResponseRecord r;
    try {
      r = record_from_jsonl(line);
    } catch (const std::exception& e) {
      throw SchemaError(line_no, std::string("bad artifact record: ") + e.what());
    }
    if (!scale) {
      scale = resolve_scale_label(r.scale_label);
    } else if (scale->label != r.scale_label) {
      throw SchemaError(line_no, "mixed scale labels in one artifact");
    }
    if (r.status == "ok") {
      if (!r.confidence) throw SchemaError(line_no, "ok record without confidence");
      ++data.n_parsed;
      data.reports.push_back(RawReport{*r.confidence, classify_report(*r.confidence, *scale)});
      if (r.correct) {
        data.samples.push_back(make_sample(*r.confidence, *scale, *r.correct == 1));
      } else {
        ++data.n_ungradable;
      }
    } else if (r.status.rfind("nonconforming:", 0) == 0) {
      ++data.n_nonconforming;
    } else if (r.status.rfind("adapter_error:", 0) == 0) {
      ++data.n_adapter_errors;
    } else {
      throw SchemaError(line_no, "unknown status: " + r.status);
    }
  }
  if (!scale) throw std::runtime_error("artifact is empty: " + path.string());
  data.scale = *scale;
  return data;
}

}  // namespace confscale
