#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "memcoder/vector.hpp"

namespace memcoder {

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // Unit-norm embedding of non-empty `text`. Deterministic per provider
  // configuration.
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::size_t dimension() const noexcept = 0;
  // Identifies the configuration in manifests, e.g. "deterministic-test/256".
  virtual std::string describe() const = 0;
};

// Offline provider: signed feature hashing of lowercase word tokens into
// `dimension` buckets, then L2-normalized.
class DeterministicEmbedder final : public EmbeddingProvider {
 public:
  explicit DeterministicEmbedder(std::size_t dimension = 256);

  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const noexcept override { return dimension_; }
  std::string describe() const override;

  // Tokenizer shared with tests: maximal runs of [A-Za-z0-9_], lowercased.
  static std::vector<std::string> tokenize(const std::string& text);

 private:
  std::size_t dimension_;
};

struct HttpEmbedderConfig {
  std::string base_url;  // e.g. http://localhost:8080/v1
  std::string model;
  std::string api_key;
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{60};

  // MEMCODER_EMBED_BASE_URL / MEMCODER_EMBED_MODEL / MEMCODER_EMBED_API_KEY.
  static HttpEmbedderConfig from_env();
};

// POST {base_url}/embeddings with {model, input: [text]};
// reads data[0].embedding and normalizes it.
class HttpEmbedder final : public EmbeddingProvider {
 public:
  explicit HttpEmbedder(HttpEmbedderConfig config);

  EmbeddingVector embed(const std::string& text) override;
  std::size_t dimension() const noexcept override { return dimension_; }
  std::string describe() const override;

 private:
  HttpEmbedderConfig config_;
  std::size_t dimension_ = 0;
};

}  // namespace memcoder
