#include "memcoder/http_util.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "memcoder/error.hpp"

namespace memcoder::http {

Endpoint parse_base_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base url '" + base_url + "' has no scheme");
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string::npos) {
    ep.scheme_host_port = base_url;
  } else {
    ep.scheme_host_port = base_url.substr(0, path_start);
    ep.path_prefix = base_url.substr(path_start);
  }
  while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  return ep;
}

nlohmann::json post_json(const std::string& base_url, const std::string& path, const nlohmann::json& body,
                         const std::string& api_key, const RetryPolicy& policy) {
  const auto ep = parse_base_url(base_url);
  httplib::Client client(ep.scheme_host_port);
  client.set_connection_timeout(policy.timeout);
  client.set_read_timeout(policy.timeout);
  client.set_write_timeout(policy.timeout);

  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  const auto payload = body.dump();
  const auto full_path = ep.path_prefix + path;
  auto delay = policy.backoff;
  std::string last_error;
  const int attempts = std::max(0, policy.max_retries) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    auto res = client.Post(full_path, headers, payload, "application/json");
    if (!res) {
      last_error = "request to " + ep.scheme_host_port + full_path + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + " from " + full_path;
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from " + full_path + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw TransportError("malformed JSON from " + full_path + ": " + e.what());
    }
  }
  throw TransportError(last_error + " (after " + std::to_string(attempts) + " attempts)");
}

}  // namespace memcoder::http
