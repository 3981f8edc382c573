#include "memcoder/feedback.hpp"

#include <sstream>

#include "memcoder/error.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

const char* to_string(Outcome outcome) noexcept {
  return outcome == Outcome::kSuccess ? "Success" : "Failure";
}

Outcome outcome_from_string(const std::string& text) {
  if (text == "Success") return Outcome::kSuccess;
  if (text == "Failure") return Outcome::kFailure;
  throw ParseError("unknown outcome '" + text + "'");
}

ExecutionFeedback ExecutionFeedback::classify(bool executed, int tests_passed, int tests_total,
                                              std::optional<std::string> traceback,
                                              std::int64_t wall_time_ms, bool timed_out) {
  ExecutionFeedback fb;
  fb.timed_out = timed_out;
  fb.executed = executed && !timed_out;
  fb.tests_passed = tests_passed;
  fb.tests_total = tests_total;
  fb.traceback = std::move(traceback);
  fb.wall_time_ms = wall_time_ms;
  const bool all_pass = fb.executed && tests_total > 0 && tests_passed == tests_total;
  fb.status = all_pass ? Outcome::kSuccess : Outcome::kFailure;
  if (fb.status == Outcome::kFailure && (!fb.traceback || fb.traceback->empty())) {
    std::ostringstream msg;
    if (timed_out) {
      msg << "timed out";
    } else {
      msg << "tests failed: " << tests_passed << "/" << tests_total << " passed";
    }
    fb.traceback = msg.str();
  }
  return fb;
}

ExecutionFeedback ExecutionFeedback::synthetic_failure(std::string traceback, int tests_total) {
  return classify(false, 0, tests_total, std::move(traceback), 0, false);
}

std::string ExecutionFeedback::summary(std::size_t max_traceback_lines) const {
  std::ostringstream out;
  out << to_string(status) << " (" << tests_passed << "/" << tests_total << " tests passed";
  if (timed_out) out << ", timed out";
  else if (!executed) out << ", runtime error";
  out << ")";
  if (traceback && !traceback->empty()) {
    out << "\n" << tail_lines(*traceback, max_traceback_lines);
  }
  return out.str();
}

void ExecutionFeedback::validate() const {
  const bool all_pass = executed && tests_total > 0 && tests_passed == tests_total;
  if ((status == Outcome::kSuccess) != all_pass) {
    throw InvariantError("feedback status inconsistent with executed/tests counts");
  }
  if (timed_out && (executed || status == Outcome::kSuccess)) {
    throw InvariantError("timed-out feedback must be a non-executed Failure");
  }
  if (tests_passed < 0 || tests_total < 0 || tests_passed > tests_total) {
    throw InvariantError("feedback test counts out of range");
  }
}

nlohmann::json to_json(const ExecutionFeedback& fb) {
  return nlohmann::json{
      {"status", to_string(fb.status)},
      {"executed", fb.executed},
      {"tests_passed", fb.tests_passed},
      {"tests_total", fb.tests_total},
      {"traceback", fb.traceback ? nlohmann::json(*fb.traceback) : nlohmann::json(nullptr)},
      {"wall_time_ms", fb.wall_time_ms},
      {"timed_out", fb.timed_out},
  };
}

ExecutionFeedback feedback_from_json(const nlohmann::json& j, const std::string& where) {
  try {
    ExecutionFeedback fb;
    fb.status = outcome_from_string(j.at("status").get<std::string>());
    fb.executed = j.at("executed").get<bool>();
    fb.tests_passed = j.at("tests_passed").get<int>();
    fb.tests_total = j.at("tests_total").get<int>();
    if (!j.at("traceback").is_null()) fb.traceback = j.at("traceback").get<std::string>();
    fb.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
    fb.timed_out = j.at("timed_out").get<bool>();
    return fb;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

}  // namespace memcoder
