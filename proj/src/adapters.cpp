#include "confscale/adapters.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace confscale {

ReplayAdapter::ReplayAdapter(const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw std::runtime_error("replay fixture not readable: " + fixture.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("replay fixture line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.contains("task_id") || !j.contains("raw")) {
      throw std::runtime_error("replay fixture line " + std::to_string(line_no) +
                               ": needs task_id and raw");
    }
    fixtures_[j["task_id"].get<std::string>()] = j["raw"].get<std::string>();
  }
}

std::string ReplayAdapter::complete(const std::string& task_id, const std::string& /*prompt*/) {
  const auto it = fixtures_.find(task_id);
  if (it == fixtures_.end()) throw AdapterError(task_id, "no fixture for task " + task_id);
  return it->second;
}

SyntheticAdapter::SyntheticAdapter(std::vector<TaskInstance> tasks, ScaleSpec scale,
                                   SynthParams params)
    : scale_(std::move(scale)), params_(std::move(params)) {
  params_.validate();
  for (auto& t : tasks) {
    auto id = t.id;
    tasks_.emplace(std::move(id), std::move(t));
  }
}

std::string SyntheticAdapter::complete(const std::string& task_id, const std::string& /*prompt*/) {
  const auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw AdapterError(task_id, "unknown task " + task_id);
  return synth_respond(it->second, scale_, params_);
}

RemoteAdapter::RemoteAdapter(RemoteConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("remote url must include a scheme: " + config_.url);
  }
  const auto path_start = config_.url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_ = config_.url;
    path_ = "/";
  } else {
    scheme_host_ = config_.url.substr(0, path_start);
    path_ = config_.url.substr(path_start);
  }
}

std::string RemoteAdapter::complete(const std::string& task_id, const std::string& prompt) {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", 0},
  };
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* token = std::getenv(config_.auth_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw AdapterError(task_id, "auth env var not set: " + config_.auth_env);
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
    }
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "http " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw AdapterError(task_id, "http " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const std::exception& e) {
      throw AdapterError(task_id, std::string("malformed completion response: ") + e.what());
    }
  }
  throw AdapterError(task_id, "retries exhausted: " + last_error);
}

}  // namespace confscale
