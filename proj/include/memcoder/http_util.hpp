#pragma once

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

namespace memcoder::http {

struct Endpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string path_prefix;       // "/v1" or ""
};

// Splits "http://host:8080/v1" into origin and path prefix.
Endpoint parse_base_url(const std::string& base_url);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};  // doubled after each failed attempt
  std::chrono::seconds timeout{60};
};

// POSTs `body` to base_url + path. Retries connection failures, 429 and 5xx
// with exponential backoff; other statuses fail immediately. Throws
// TransportError once attempts are exhausted.
nlohmann::json post_json(const std::string& base_url, const std::string& path, const nlohmann::json& body,
                         const std::string& api_key, const RetryPolicy& policy);

}  // namespace memcoder::http
