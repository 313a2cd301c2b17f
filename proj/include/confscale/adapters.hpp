#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include "confscale/scale.hpp"
#include "confscale/synth.hpp"
#include "confscale/task.hpp"

namespace confscale {

struct AdapterError : std::runtime_error {
  std::string task_id;
  AdapterError(std::string task_id_, const std::string& cause)
      : std::runtime_error(cause), task_id(std::move(task_id_)) {}
};

/// One model behind a uniform completion surface. Deterministic decoding is
/// the contract: implementations must not inject randomness beyond what their
/// configuration fixes.
class ModelAdapter {
 public:
  virtual ~ModelAdapter() = default;
  virtual std::string complete(const std::string& task_id, const std::string& prompt) = 0;
  virtual std::string name() const = 0;
};

/// Serves raw outputs from a fixture JSONL ({"task_id": ..., "raw": ...});
/// a miss is an AdapterError.
class ReplayAdapter final : public ModelAdapter {
 public:
  explicit ReplayAdapter(const std::filesystem::path& fixture);
  std::string complete(const std::string& task_id, const std::string& prompt) override;
  std::string name() const override { return "replay"; }

 private:
  std::map<std::string, std::string> fixtures_;
};

/// Wraps the synthetic SDT observer for one scale condition.
class SyntheticAdapter final : public ModelAdapter {
 public:
  SyntheticAdapter(std::vector<TaskInstance> tasks, ScaleSpec scale, SynthParams params);
  std::string complete(const std::string& task_id, const std::string& prompt) override;
  std::string name() const override { return "synthetic"; }

 private:
  std::map<std::string, TaskInstance> tasks_;
  ScaleSpec scale_;
  SynthParams params_;
};

/// Generic JSON-over-HTTP chat-completion endpoint. The bearer token is read
/// from the environment variable named by auth_env; temperature is pinned
/// to 0; transient failures retry with exponential backoff.
struct RemoteConfig {
  std::string url;        // e.g. http://host:8000/v1/chat/completions
  std::string model;      // model name sent in the request body
  std::string auth_env;   // env var holding the bearer token ("" = no auth)
  int timeout_s = 60;
  int max_retries = 3;
  int backoff_ms = 250;
};

class RemoteAdapter final : public ModelAdapter {
 public:
  explicit RemoteAdapter(RemoteConfig config);
  std::string complete(const std::string& task_id, const std::string& prompt) override;
  std::string name() const override { return "remote:" + config_.model; }

 private:
  RemoteConfig config_;
  std::string scheme_host_;
  std::string path_;
};

}  // namespace confscale
