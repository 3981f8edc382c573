#include "memcoder/embedding.hpp"

#include <cctype>
#include <cstdlib>

#include "memcoder/error.hpp"
#include "memcoder/hash.hpp"
#include "memcoder/http_util.hpp"

namespace memcoder {

DeterministicEmbedder::DeterministicEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw ConfigError("embedding dimension must be positive");
}

std::vector<std::string> DeterministicEmbedder::tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '_') {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

EmbeddingVector DeterministicEmbedder::embed(const std::string& text) {
  if (text.empty()) throw InvariantError("embed: empty text");
  std::vector<double> values(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    const auto h = fnv1a64(token);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    values[h % dimension_] += sign;
  }
  if (l2_norm(values) == 0.0) {
    // No tokens, or every bucket cancelled: fall back to one bucket keyed by
    // the raw bytes so the function stays total.
    values[fnv1a64(text) % dimension_] = 1.0;
  }
  return EmbeddingVector::normalized(std::move(values));
}

std::string DeterministicEmbedder::describe() const { return "deterministic-test/" + std::to_string(dimension_); }

HttpEmbedderConfig HttpEmbedderConfig::from_env() {
  auto env = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string{};
  };
  HttpEmbedderConfig c;
  c.base_url = env("MEMCODER_EMBED_BASE_URL");
  c.model = env("MEMCODER_EMBED_MODEL");
  c.api_key = env("MEMCODER_EMBED_API_KEY");
  return c;
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("http embedder: MEMCODER_EMBED_BASE_URL is not set");
  if (config_.model.empty()) throw ConfigError("http embedder: MEMCODER_EMBED_MODEL is not set");
}

EmbeddingVector HttpEmbedder::embed(const std::string& text) {
  if (text.empty()) throw InvariantError("embed: empty text");
  const nlohmann::json body{{"model", config_.model}, {"input", nlohmann::json::array({text})}};
  const auto reply = http::post_json(config_.base_url, "/embeddings", body, config_.api_key,
                                     {config_.max_retries, config_.backoff, config_.timeout});
  std::vector<double> values;
  try {
    values = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("embedding response missing data[0].embedding: ") + e.what());
  }
  if (dimension_ == 0) {
    dimension_ = values.size();
  } else if (values.size() != dimension_) {
    throw TransportError("embedding dimension changed from " + std::to_string(dimension_) + " to " +
                         std::to_string(values.size()));
  }
  return EmbeddingVector::normalized(std::move(values));
}

std::string HttpEmbedder::describe() const { return "http/" + config_.model; }

}  // namespace memcoder
