#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace memcoder {

// One benchmark instance. JSON-lines shape:
//   {task_id, requirement, tests: [...], gold_apis?: [...], entry_point?}
struct TaskRecord {
  std::string task_id;
  std::string requirement;
  std::vector<std::string> tests;
  std::optional<std::vector<std::string>> gold_apis;
  std::optional<std::string> entry_point;
};

nlohmann::json to_json(const TaskRecord& task);
TaskRecord task_from_json(const nlohmann::json& j, const std::string& where);

// Parses a JSON-lines benchmark. Blank lines are skipped. Throws
// BenchmarkFormatError (naming the line) for empty tests, duplicate ids or
// missing fields.
std::vector<TaskRecord> load_benchmark(const std::filesystem::path& path);
std::vector<TaskRecord> parse_benchmark(const std::string& text, const std::string& origin);

// Seeded Fisher-Yates on mt19937_64 without std::uniform_int_distribution,
// so the order is identical on every standard library.
void seeded_shuffle(std::vector<TaskRecord>& tasks, std::uint64_t seed);

}  // namespace memcoder
