#include "memcoder/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "memcoder/error.hpp"
#include "memcoder/hash.hpp"
#include "memcoder/http_util.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

void ChatRequest::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

std::string request_fingerprint(const MessageList& messages, std::size_t sample_index) {
  nlohmann::json canon = nlohmann::json::array();
  for (const auto& m : messages) canon.push_back(nlohmann::json::array({m.role, m.content}));
  return content_hash(canon.dump() + "\n#" + std::to_string(sample_index));
}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::string> fixtures) : fixtures_(std::move(fixtures)) {}

std::map<std::string, std::string> load_llm_fixtures(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("fixtures " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("fixtures " + path.string() + ": expected a JSON object");
  std::map<std::string, std::string> fixtures;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) throw ParseError("fixtures " + path.string() + ": value of " + it.key() + " is not a string");
    fixtures.emplace(it.key(), it.value().get<std::string>());
  }
  return fixtures;
}

ScriptedBackend ScriptedBackend::load(const std::filesystem::path& path) { return ScriptedBackend(load_llm_fixtures(path)); }

Completion ScriptedBackend::complete(const ChatRequest& request, std::size_t sample_index) {
  const auto fp = request_fingerprint(request.messages, sample_index);
  auto it = fixtures_.find(fp);
  {
    std::lock_guard lock(mu_);
    if (it == fixtures_.end()) {
      ++misses_;
    } else {
      ++hits_;
    }
  }
  if (it == fixtures_.end()) {
    throw FixtureMissError("no scripted response for fingerprint " + fp + " (sample " + std::to_string(sample_index) + ")");
  }
  std::size_t prompt = 0;
  for (const auto& m : request.messages) prompt += approx_tokens(m.content);
  return Completion{it->second, prompt, approx_tokens(it->second)};
}

std::size_t ScriptedBackend::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t ScriptedBackend::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

HttpLlmConfig HttpLlmConfig::from_env() {
  auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string{};
  };
  HttpLlmConfig c;
  c.base_url = env("MEMCODER_LLM_BASE_URL");
  c.api_key = env("MEMCODER_LLM_API_KEY");
  c.model = env("MEMCODER_LLM_MODEL");
  return c;
}

HttpBackend::HttpBackend(HttpLlmConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("http LLM backend: base url not set (--llm-base-url / MEMCODER_LLM_BASE_URL)");
  if (config_.model.empty()) throw ConfigError("http LLM backend: model not set (--llm-model / MEMCODER_LLM_MODEL)");
}

void HttpBackend::throttle() {
  if (config_.requests_per_second <= 0.0) return;
  const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / config_.requests_per_second));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(rate_mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  std::this_thread::sleep_until(slot);
}

Completion HttpBackend::complete(const ChatRequest& request, std::size_t /*sample_index*/) {
  request.validate();
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  const nlohmann::json body{
      {"model", request.model.empty() ? config_.model : request.model},
      {"messages", messages},
      {"temperature", request.temperature},
      {"top_p", request.top_p},
      {"max_tokens", request.max_tokens},
  };
  throttle();
  const auto reply = http::post_json(config_.base_url, "/chat/completions", body, config_.api_key,
                                     {config_.max_retries, config_.backoff, config_.timeout});
  Completion out;
  try {
    out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("chat response missing choices[0].message.content: ") + e.what());
  }
  if (reply.contains("usage") && reply["usage"].is_object()) {
    out.prompt_tokens = reply["usage"].value("prompt_tokens", std::size_t{0});
    out.completion_tokens = reply["usage"].value("completion_tokens", std::size_t{0});
  } else {
    for (const auto& m : request.messages) out.prompt_tokens += approx_tokens(m.content);
    out.completion_tokens = approx_tokens(out.text);
  }
  return out;
}

Completion FunctionBackend::complete(const ChatRequest& request, std::size_t sample_index) {
  auto text = fn_(request, sample_index);
  std::size_t prompt = 0;
  for (const auto& m : request.messages) prompt += approx_tokens(m.content);
  return Completion{text, prompt, approx_tokens(text)};
}

Completion RecordingBackend::complete(const ChatRequest& request, std::size_t sample_index) {
  auto out = inner_.complete(request, sample_index);
  std::lock_guard lock(mu_);
  recorded_[request_fingerprint(request.messages, sample_index)] = out.text;
  return out;
}

std::map<std::string, std::string> RecordingBackend::recorded() const {
  std::lock_guard lock(mu_);
  return recorded_;
}

nlohmann::json fixtures_to_json(const std::map<std::string, std::string>& fixtures) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : fixtures) j[k] = v;
  return j;
}

}  // namespace memcoder
