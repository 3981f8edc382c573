#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "memcoder/chat.hpp"

namespace memcoder {

// Sampling defaults: temperature 0.7, top_p 0.95, 4096 max tokens.
struct ChatRequest {
  MessageList messages;
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 4096;
  std::string model;

  // Throws ConfigError unless temperature >= 0, 0 < top_p <= 1, max_tokens > 0.
  void validate() const;
};

struct Completion {
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

// Stable hex fingerprint of the canonical message serialization plus the
// sample index. Sampling parameters are not part of it.
std::string request_fingerprint(const MessageList& messages, std::size_t sample_index);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  // Must be safe to call concurrently.
  virtual Completion complete(const ChatRequest& request, std::size_t sample_index) = 0;
  virtual std::string describe() const = 0;
};

// Fixture file: a JSON object mapping fingerprint -> response text.
std::map<std::string, std::string> load_llm_fixtures(const std::filesystem::path& path);

// Pure lookup of canned responses. Unknown fingerprints raise
// FixtureMissError; there is no default response.
class ScriptedBackend final : public LlmBackend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::string> fixtures);
  // Fixture file: a JSON object mapping fingerprint -> response text.
  static ScriptedBackend load(const std::filesystem::path& path);

  Completion complete(const ChatRequest& request, std::size_t sample_index) override;
  std::string describe() const override { return "scripted"; }

  std::size_t hits() const;
  std::size_t misses() const;
  std::size_t size() const noexcept { return fixtures_.size(); }

 private:
  std::map<std::string, std::string> fixtures_;
  mutable std::mutex mu_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

struct HttpLlmConfig {
  std::string base_url;  // requests go to {base_url}/chat/completions
  std::string api_key;
  std::string model;
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{120};
  double requests_per_second = 0.0;  // 0 disables rate limiting

  // MEMCODER_LLM_BASE_URL / MEMCODER_LLM_API_KEY / MEMCODER_LLM_MODEL.
  static HttpLlmConfig from_env();
};

class HttpBackend final : public LlmBackend {
 public:
  explicit HttpBackend(HttpLlmConfig config);
  Completion complete(const ChatRequest& request, std::size_t sample_index) override;
  std::string describe() const override { return "http/" + config_.model; }

 private:
  void throttle();

  HttpLlmConfig config_;
  std::mutex rate_mu_;
  std::chrono::steady_clock::time_point next_slot_{};
};

// Adapts any callable; used to author fixtures and in tests.
class FunctionBackend final : public LlmBackend {
 public:
  using Fn = std::function<std::string(const ChatRequest&, std::size_t)>;
  explicit FunctionBackend(Fn fn, std::string name = "function") : fn_(std::move(fn)), name_(std::move(name)) {}
  Completion complete(const ChatRequest& request, std::size_t sample_index) override;
  std::string describe() const override { return name_; }

 private:
  Fn fn_;
  std::string name_;
};

// Forwards to `inner` and records every fingerprint -> response pair, in
// the fixture-file format ScriptedBackend reads.
class RecordingBackend final : public LlmBackend {
 public:
  explicit RecordingBackend(LlmBackend& inner) : inner_(inner) {}
  Completion complete(const ChatRequest& request, std::size_t sample_index) override;
  std::string describe() const override { return inner_.describe(); }

  std::map<std::string, std::string> recorded() const;

 private:
  LlmBackend& inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> recorded_;
};

nlohmann::json fixtures_to_json(const std::map<std::string, std::string>& fixtures);

}  // namespace memcoder
