#include <doctest.h>

#include <chrono>
#include <cstdlib>

#include "memcoder/error.hpp"
#include "memcoder/execution.hpp"
#include "memcoder/text_util.hpp"
#include "support.hpp"

using namespace memcoder;
using nlohmann::json;

namespace {

json response(bool executed, int passed, int total) {
  return {{"executed", executed}, {"tests_passed", passed}, {"tests_total", total},
          {"traceback", executed && passed == total ? json(nullptr) : json("AssertionError")},
          {"timed_out", false}, {"wall_time_ms", 3}};
}

const std::vector<std::string> kTests = {"assert f() == 1", "assert f() != 2"};

}  // namespace

TEST_SUITE("execution") {
  TEST_CASE("runner request wire format") {
    RunnerRequest r{"x = 1", kTests, 500};
    const auto j = to_json(r);
    CHECK(j.dump() == R"({"code":"x = 1","tests":["assert f() == 1","assert f() != 2"],"timeout_ms":500})");
    const auto back = runner_request_from_json(j);
    CHECK(back.code == r.code);
    CHECK(back.tests == r.tests);
    CHECK(back.timeout_ms == 500);
    CHECK_THROWS_AS(runner_request_from_json(json{{"code", "x"}}), ParseError);
  }

  TEST_CASE("well-formed responses classify") {
    auto ok = parse_runner_response(response(true, 2, 2).dump(), 2);
    CHECK(ok.success());
    auto partial = parse_runner_response(response(true, 1, 2).dump(), 2);
    CHECK_FALSE(partial.success());
    CHECK(partial.executed);
    auto raised = parse_runner_response(response(false, 0, 2).dump(), 2);
    CHECK_FALSE(raised.executed);
    CHECK(raised.traceback == "AssertionError");
  }

  TEST_CASE("protocol violations are transport errors") {
    CHECK_THROWS_AS(parse_runner_response("not json", 2), TransportError);
    CHECK_THROWS_AS(parse_runner_response("[1]", 2), TransportError);
    for (const char* key : {"executed", "tests_passed", "tests_total", "traceback", "timed_out", "wall_time_ms"}) {
      auto j = response(true, 2, 2);
      j.erase(key);
      CAPTURE(key);
      CHECK_THROWS_AS(parse_runner_response(j.dump(), 2), TransportError);
    }
    auto wrong_type = response(true, 2, 2);
    wrong_type["executed"] = "yes";
    CHECK_THROWS_AS(parse_runner_response(wrong_type.dump(), 2), TransportError);
    CHECK_THROWS_AS(parse_runner_response(response(true, 3, 3).dump(), 2), TransportError);
    CHECK_THROWS_AS(parse_runner_response(response(true, 3, 2).dump(), 2), TransportError);
    auto negative = response(true, 0, 2);
    negative["tests_passed"] = -1;
    CHECK_THROWS_AS(parse_runner_response(negative.dump(), 2), TransportError);
  }

  TEST_CASE("stub runner serves fixtures by candidate fingerprint") {
    StubRunner stub({{candidate_fingerprint("good", kTests), response(true, 2, 2)},
                     {candidate_fingerprint("garbage", kTests), json{{"raw", "}{"}}},
                     {candidate_fingerprint("crash", kTests), json{{"exit_code", 9}}}});
    CHECK(execute_candidate(stub, "good", kTests, 100).success());

    const auto miss = execute_candidate(stub, "unknown", kTests, 100);
    CHECK_FALSE(miss.success());
    CHECK_FALSE(miss.executed);
    CHECK(miss.traceback->find(candidate_fingerprint("unknown", kTests)) != std::string::npos);

    const auto garbage = execute_candidate(stub, "garbage", kTests, 100);
    CHECK_FALSE(garbage.success());
    CHECK(garbage.traceback->rfind("runner protocol error", 0) == 0);
    const auto crash = execute_candidate(stub, "crash", kTests, 100);
    CHECK_FALSE(crash.success());
    CHECK(crash.tests_total == 2);
  }

  TEST_CASE("fingerprint separates code from tests") {
    CHECK(candidate_fingerprint("a", {"b"}) != candidate_fingerprint("ab", {}));
    CHECK(candidate_fingerprint("a", {"b", "c"}) != candidate_fingerprint("a", {"bc"}));
  }

  TEST_CASE("execute_candidate argument checks") {
    StubRunner stub({});
    CHECK_THROWS_AS(execute_candidate(stub, "x", {}, 100), BenchmarkFormatError);
    CHECK_THROWS_AS(execute_candidate(stub, "x", kTests, 0), ConfigError);
  }

  TEST_CASE("process runner speaks the protocol over pipes") {
    testing::TempDir dir;
    const json fixtures = {
        {candidate_fingerprint("good", kTests), response(true, 2, 2)},
        {candidate_fingerprint("half", kTests), response(true, 1, 2)},
        {candidate_fingerprint("slow", kTests), json{{"sleep_ms", 5000}}},
        {candidate_fingerprint("crash", kTests), json{{"exit_code", 7}}},
        {candidate_fingerprint("garbage", kTests), json{{"raw", "{\"executed\": tru"}}},
    };
    write_file_atomic(dir / "fx.json", fixtures.dump());
    ::setenv("MEMCODER_STUB_FIXTURES", (dir / "fx.json").c_str(), 1);

    ProcessRunner runner(MEMCODER_STUB_RUNNER, std::chrono::milliseconds(200));
    CHECK(execute_candidate(runner, "good", kTests, 1000).success());
    const auto half = execute_candidate(runner, "half", kTests, 1000);
    CHECK(half.executed);
    CHECK(half.tests_passed == 1);

    // Budget: 2 tests * 50 ms + 200 ms grace, far below the 5 s sleep.
    const auto t0 = std::chrono::steady_clock::now();
    const auto slow = execute_candidate(runner, "slow", kTests, 50);
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(3));
    CHECK(slow.timed_out);
    CHECK_FALSE(slow.executed);
    CHECK_FALSE(slow.success());

    const auto crash = execute_candidate(runner, "crash", kTests, 1000);
    CHECK_FALSE(crash.success());
    CHECK(crash.traceback->find("status 7") != std::string::npos);
    const auto garbage = execute_candidate(runner, "garbage", kTests, 1000);
    CHECK_FALSE(garbage.success());
    CHECK(garbage.traceback->find("not JSON") != std::string::npos);
    ::unsetenv("MEMCODER_STUB_FIXTURES");
  }

  TEST_CASE("process runner rejects a missing executable") {
    CHECK_THROWS_AS(ProcessRunner("/nonexistent/runner"), ConfigError);
  }
}
