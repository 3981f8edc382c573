#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memcoder/error.hpp"
#include "memcoder/feedback.hpp"

namespace memcoder {

inline constexpr std::int64_t kDefaultTimeoutMs = 10000;

// Wire request: {"code": "...", "tests": ["..."], "timeout_ms": 10000}
struct RunnerRequest {
  std::string code;
  std::vector<std::string> tests;
  std::int64_t timeout_ms = kDefaultTimeoutMs;
};

nlohmann::json to_json(const RunnerRequest& request);
RunnerRequest runner_request_from_json(const nlohmann::json& j);

class BenchmarkFormatError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Something that answers runner requests with a response document. Must be
// safe to call concurrently.
class Runner {
 public:
  virtual ~Runner() = default;
  // Raw response text; any protocol problem is reported by throwing
  // TransportError, which execute_candidate turns into a Failure.
  virtual std::string run(const RunnerRequest& request) = 0;
  virtual std::string describe() const = 0;
};

// Fingerprint over (code, tests) used to key stub fixtures.
std::string candidate_fingerprint(const std::string& code, const std::vector<std::string>& tests);

// In-process, fixture-driven runner. A fixture value is a wire response
// object; unknown candidates get a non-executed Failure response that names
// the fingerprint.
class StubRunner final : public Runner {
 public:
  explicit StubRunner(std::map<std::string, nlohmann::json> fixtures);
  // Fixture file: JSON object mapping candidate fingerprint -> response.
  static StubRunner load(const std::filesystem::path& path);

  std::string run(const RunnerRequest& request) override;
  std::string describe() const override { return "stub"; }

  // Shared with the stub-runner executable: builds the response document
  // for one request, including the control fields (sleep_ms, exit_code, raw).
  static nlohmann::json lookup(const std::map<std::string, nlohmann::json>& fixtures, const RunnerRequest& request);

 private:
  std::map<std::string, nlohmann::json> fixtures_;
};

std::map<std::string, nlohmann::json> load_stub_fixtures(const std::filesystem::path& path);

// Talks to an external runner executable over stdin/stdout. The whole
// exchange is bounded by timeout_ms * max(1, |tests|) + grace; past that the
// child is killed and the candidate marked timed out.
class ProcessRunner final : public Runner {
 public:
  // Throws ConfigError when `executable` does not exist or is not executable.
  explicit ProcessRunner(std::filesystem::path executable,
                         std::chrono::milliseconds grace = std::chrono::milliseconds(2000));

  std::string run(const RunnerRequest& request) override;
  std::string describe() const override { return executable_.string(); }

 private:
  std::filesystem::path executable_;
  std::chrono::milliseconds grace_;
};

// Thrown by ProcessRunner when its own deadline fires.
class RunnerTimeout : public TransportError {
 public:
  using TransportError::TransportError;
};

// Runs `code` against `tests` and classifies the result. Runner crashes and
// protocol violations become a Failure with a synthetic traceback.
// Throws BenchmarkFormatError for an empty test list and ConfigError for a
// non-positive timeout.
ExecutionFeedback execute_candidate(Runner& runner, const std::string& code, const std::vector<std::string>& tests,
                                    std::int64_t timeout_ms);

// Validates a response document against the request; throws TransportError
// describing the first protocol violation.
ExecutionFeedback parse_runner_response(const std::string& text, std::size_t tests_total);

}  // namespace memcoder
