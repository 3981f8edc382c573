#include "memcoder/execution.hpp"

#include <cerrno>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "memcoder/hash.hpp"
#include "memcoder/text_util.hpp"

extern char** environ;

namespace memcoder {

nlohmann::json to_json(const RunnerRequest& request) {
  return {{"code", request.code}, {"tests", request.tests}, {"timeout_ms", request.timeout_ms}};
}

RunnerRequest runner_request_from_json(const nlohmann::json& j) {
  try {
    RunnerRequest r;
    r.code = j.at("code").get<std::string>();
    r.tests = j.at("tests").get<std::vector<std::string>>();
    r.timeout_ms = j.at("timeout_ms").get<std::int64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("runner request: ") + e.what());
  }
}

std::string candidate_fingerprint(const std::string& code, const std::vector<std::string>& tests) {
  return content_hash(nlohmann::json::array({code, tests}).dump());
}

StubRunner::StubRunner(std::map<std::string, nlohmann::json> fixtures) : fixtures_(std::move(fixtures)) {}

std::map<std::string, nlohmann::json> load_stub_fixtures(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("runner fixtures " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("runner fixtures " + path.string() + ": expected a JSON object");
  std::map<std::string, nlohmann::json> out;
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace(it.key(), it.value());
  return out;
}

StubRunner StubRunner::load(const std::filesystem::path& path) { return StubRunner(load_stub_fixtures(path)); }

nlohmann::json StubRunner::lookup(const std::map<std::string, nlohmann::json>& fixtures,
                                  const RunnerRequest& request) {
  const auto fp = candidate_fingerprint(request.code, request.tests);
  auto it = fixtures.find(fp);
  if (it != fixtures.end()) return it->second;
  return {
      {"executed", false},
      {"tests_passed", 0},
      {"tests_total", request.tests.size()},
      {"traceback", "stub runner: no fixture for candidate " + fp},
      {"timed_out", false},
      {"wall_time_ms", 0},
  };
}

std::string StubRunner::run(const RunnerRequest& request) {
  auto response = lookup(fixtures_, request);
  if (response.contains("raw")) return response["raw"].get<std::string>();
  if (response.contains("exit_code")) {
    throw TransportError("runner exited with status " + std::to_string(response["exit_code"].get<int>()) +
                         " and no response");
  }
  response.erase("sleep_ms");
  return response.dump();
}

ProcessRunner::ProcessRunner(std::filesystem::path executable, std::chrono::milliseconds grace)
    : executable_(std::move(executable)), grace_(grace) {
  if (!std::filesystem::exists(executable_)) {
    throw ConfigError("runner executable not found: " + executable_.string() + " (set --runner or MEMCODER_RUNNER)");
  }
  if (::access(executable_.c_str(), X_OK) != 0) {
    throw ConfigError("runner is not executable: " + executable_.string());
  }
  // A runner that exits before reading its request must not kill us.
  ::signal(SIGPIPE, SIG_IGN);
}

namespace {

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

void make_pipe(Fd& read_end, Fd& write_end) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw TransportError(std::string("pipe: ") + std::strerror(errno));
  read_end.fd = fds[0];
  write_end.fd = fds[1];
}

}  // namespace

std::string ProcessRunner::run(const RunnerRequest& request) {
  Fd in_read, in_write, out_read, out_write;
  make_pipe(in_read, in_write);
  make_pipe(out_read, out_write);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_read.fd, STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_write.fd, STDOUT_FILENO);

  const std::string path = executable_.string();
  char* argv[] = {const_cast<char*>(path.c_str()), nullptr};
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, path.c_str(), &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw TransportError("cannot spawn runner " + path + ": " + std::strerror(rc));
  in_read.reset();
  out_write.reset();

  ::fcntl(in_write.fd, F_SETFL, O_NONBLOCK);
  ::fcntl(out_read.fd, F_SETFL, O_NONBLOCK);

  const std::string payload = to_json(request).dump();
  std::size_t written = 0;
  std::string output;
  const auto budget = std::chrono::milliseconds(request.timeout_ms) *
                          static_cast<std::int64_t>(std::max<std::size_t>(1, request.tests.size())) +
                      grace_;
  const auto deadline = std::chrono::steady_clock::now() + budget;
  bool timed_out = false;

  if (payload.empty()) in_write.reset();
  while (out_read.fd >= 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      timed_out = true;
      break;
    }
    pollfd fds[2];
    nfds_t n = 0;
    fds[n++] = {out_read.fd, POLLIN, 0};
    if (in_write.fd >= 0) fds[n++] = {in_write.fd, POLLOUT, 0};
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int ready = ::poll(fds, n, static_cast<int>(std::min<std::int64_t>(wait_ms, 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (n > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const auto w = ::write(in_write.fd, payload.data() + written, payload.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = payload.size();  // child closed stdin
      if (written >= payload.size()) in_write.reset();
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      const auto r = ::read(out_read.fd, buf, sizeof buf);
      if (r > 0) {
        output.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EAGAIN) {
        out_read.reset();
      }
    }
  }
  in_write.reset();
  out_read.reset();

  int status = 0;
  if (timed_out) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    throw RunnerTimeout("runner exceeded " + std::to_string(budget.count()) + " ms and was killed");
  }
  // stdout closed; give the child the rest of the budget to exit.
  while (true) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (WIFSIGNALED(status)) {
    throw TransportError("runner killed by signal " + std::to_string(WTERMSIG(status)));
  }
  if (WIFEXITED(status) && WEXITSTATUS(status) != 0) {
    throw TransportError("runner exited with status " + std::to_string(WEXITSTATUS(status)));
  }
  return output;
}

ExecutionFeedback parse_runner_response(const std::string& text, std::size_t tests_total) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(std::string("runner response is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw TransportError("runner response is not a JSON object");
  auto require = [&](const char* key, auto check, const char* type) {
    if (!j.contains(key) || !check(j[key])) {
      throw TransportError(std::string("runner response field '") + key + "' missing or not " + type);
    }
  };
  require("executed", [](const auto& v) { return v.is_boolean(); }, "a bool");
  require("tests_passed", [](const auto& v) { return v.is_number_integer(); }, "an integer");
  require("tests_total", [](const auto& v) { return v.is_number_integer(); }, "an integer");
  require("traceback", [](const auto& v) { return v.is_null() || v.is_string(); }, "a string or null");
  require("timed_out", [](const auto& v) { return v.is_boolean(); }, "a bool");
  require("wall_time_ms", [](const auto& v) { return v.is_number_integer(); }, "an integer");

  const auto passed = j["tests_passed"].get<std::int64_t>();
  const auto total = j["tests_total"].get<std::int64_t>();
  if (total != static_cast<std::int64_t>(tests_total)) {
    throw TransportError("runner reported tests_total " + std::to_string(total) + " for " +
                         std::to_string(tests_total) + " tests");
  }
  if (passed < 0 || passed > total) throw TransportError("runner reported tests_passed out of range");
  std::optional<std::string> traceback;
  if (j["traceback"].is_string()) traceback = j["traceback"].get<std::string>();
  return ExecutionFeedback::classify(j["executed"].get<bool>(), static_cast<int>(passed), static_cast<int>(total),
                                     std::move(traceback), std::max<std::int64_t>(0, j["wall_time_ms"].get<std::int64_t>()),
                                     j["timed_out"].get<bool>());
}

ExecutionFeedback execute_candidate(Runner& runner, const std::string& code, const std::vector<std::string>& tests,
                                    std::int64_t timeout_ms) {
  if (tests.empty()) throw BenchmarkFormatError("task has an empty test list");
  if (timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
  const auto total = static_cast<int>(tests.size());
  try {
    return parse_runner_response(runner.run(RunnerRequest{code, tests, timeout_ms}), tests.size());
  } catch (const RunnerTimeout& e) {
    return ExecutionFeedback::classify(false, 0, total, std::string("runner protocol error: ") + e.what(),
                                       timeout_ms * total, true);
  } catch (const TransportError& e) {
    return ExecutionFeedback::synthetic_failure(std::string("runner protocol error: ") + e.what(), total);
  }
}

}  // namespace memcoder
