// Fixture-driven runner speaking the runner protocol on stdin/stdout.
// Fixtures come from $MEMCODER_STUB_FIXTURES. Control fields in a fixture:
//   sleep_ms   delay before answering
//   exit_code  exit with this status and print nothing
//   raw        print this text verbatim instead of a JSON response
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <iterator>
#include <thread>

#include "memcoder/execution.hpp"

int main() {
  using namespace memcoder;
  std::map<std::string, nlohmann::json> fixtures;
  if (const char* path = std::getenv("MEMCODER_STUB_FIXTURES"); path && *path) {
    try {
      fixtures = load_stub_fixtures(path);
    } catch (const std::exception& e) {
      std::cerr << "stub runner: " << e.what() << "\n";
      return 3;
    }
  }
  const std::string input{std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  RunnerRequest request;
  try {
    request = runner_request_from_json(nlohmann::json::parse(input));
  } catch (const std::exception& e) {
    std::cerr << "stub runner: bad request: " << e.what() << "\n";
    return 2;
  }
  auto response = StubRunner::lookup(fixtures, request);
  if (response.contains("sleep_ms")) {
    std::this_thread::sleep_for(std::chrono::milliseconds(response["sleep_ms"].get<int>()));
    response.erase("sleep_ms");
  }
  if (response.contains("exit_code")) return response["exit_code"].get<int>();
  if (response.contains("raw")) {
    std::cout << response["raw"].get<std::string>();
  } else {
    std::cout << response.dump() << "\n";
  }
  return 0;
}
