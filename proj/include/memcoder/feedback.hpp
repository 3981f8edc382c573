#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace memcoder {

enum class Outcome { kSuccess, kFailure };

const char* to_string(Outcome outcome) noexcept;
Outcome outcome_from_string(const std::string& text);

// Binary verdict f_t plus the execution details it was derived from.
//   status == Success  <=>  executed && tests_total > 0 && tests_passed == tests_total
//   timed_out          =>   status == Failure && !executed
struct ExecutionFeedback {
  Outcome status = Outcome::kFailure;
  bool executed = false;
  int tests_passed = 0;
  int tests_total = 0;
  std::optional<std::string> traceback;
  std::int64_t wall_time_ms = 0;
  bool timed_out = false;

  bool success() const noexcept { return status == Outcome::kSuccess; }

  // Derives `status` from the other fields and normalizes timed_out.
  static ExecutionFeedback classify(bool executed, int tests_passed, int tests_total,
                                    std::optional<std::string> traceback, std::int64_t wall_time_ms,
                                    bool timed_out);

  // A Failure that never reached (or never got a valid answer from) the runner.
  static ExecutionFeedback synthetic_failure(std::string traceback, int tests_total);

  // One-line summary plus the last `max_traceback_lines` traceback lines.
  std::string summary(std::size_t max_traceback_lines = 10) const;

  // Throws InvariantError if the classification invariants do not hold.
  void validate() const;

  friend bool operator==(const ExecutionFeedback&, const ExecutionFeedback&) = default;
};

nlohmann::json to_json(const ExecutionFeedback& fb);
ExecutionFeedback feedback_from_json(const nlohmann::json& j, const std::string& where);

}  // namespace memcoder
