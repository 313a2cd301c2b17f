#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confscale/adapters.hpp"
#include "confscale/metrics.hpp"
#include "confscale/sample.hpp"
#include "confscale/task.hpp"

namespace confscale {

struct SchemaError : std::runtime_error {
  std::size_t line;
  std::string reason;
  SchemaError(std::size_t line_, std::string reason_)
      : std::runtime_error("line " + std::to_string(line_) + ": " + reason_),
        line(line_),
        reason(std::move(reason_)) {}
};

struct DuplicateId : std::runtime_error {
  std::string id;
  explicit DuplicateId(std::string id_)
      : std::runtime_error("duplicate task id: " + id_), id(std::move(id_)) {}
};

/// JSONL dataset ingestion; validates the record schema, rejects duplicate
/// ids, preserves order.
std::vector<TaskInstance> load_dataset(const std::filesystem::path& path);

/// Canonical single-line serialization (the load/emit round trip is
/// byte-stable).
std::string task_to_jsonl(const TaskInstance& task);

struct RunConfig {
  std::filesystem::path dataset_path;
  std::vector<std::string> scale_labels;
  std::string adapter_descriptor;  // "replay:<fixture>", "synthetic", "remote"
  std::uint64_t seed = 0;
  int max_parallel = 1;
  std::filesystem::path output_dir = "runs";
  std::optional<std::string> dataset_name;     // defaults to dataset_path stem
  std::optional<std::string> fixed_timestamp;  // pin for byte-identical artifacts
};

RunConfig load_run_config(const std::filesystem::path& path);

struct ResponseRecord {
  std::string task_id;
  std::string scale_label;
  std::string prompt_text;
  std::string raw_output;
  std::string status;  // "ok" | "nonconforming:<reason>" | "adapter_error:<cause>"
  std::optional<long long> confidence;  // present iff parse status ok
  std::optional<int> correct;           // present iff answer gradable
  std::string timestamp;
};

std::string record_to_jsonl(const ResponseRecord& record);
ResponseRecord record_from_jsonl(const std::string& line);

struct RunResult {
  std::filesystem::path artifact;
  std::size_t n_new = 0;
  std::size_t n_skipped = 0;
  std::size_t n_adapter_errors = 0;
};

/// Runs one condition over the task list: renders prompts, dispatches up to
/// max_parallel concurrent adapter calls, appends records in task order with
/// an incremental flush, and skips task ids already present in the artifact.
RunResult run_condition(const RunConfig& config, std::span<const TaskInstance> tasks,
                        const ScaleSpec& scale, ModelAdapter& adapter);

/// An artifact re-read for scoring: classified raw reports, gradable samples,
/// and the per-condition denominators.
struct ArtifactData {
  ScaleSpec scale;
  std::vector<RawReport> reports;   // parsed-Ok records
  std::vector<EvalSample> samples;  // gradable subset, clamped
  std::size_t n_parsed = 0;
  std::size_t n_nonconforming = 0;
  std::size_t n_adapter_errors = 0;
  std::size_t n_ungradable = 0;
};

ArtifactData load_artifact(const std::filesystem::path& path);

std::string now_iso8601_utc();

}  // namespace confscale
