#include "memcoder/benchmark.hpp"

#include <random>
#include <set>

#include "memcoder/error.hpp"
#include "memcoder/execution.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

nlohmann::json to_json(const TaskRecord& task) {
  nlohmann::json j{{"task_id", task.task_id}, {"requirement", task.requirement}, {"tests", task.tests}};
  if (task.gold_apis) j["gold_apis"] = *task.gold_apis;
  if (task.entry_point) j["entry_point"] = *task.entry_point;
  return j;
}

TaskRecord task_from_json(const nlohmann::json& j, const std::string& where) {
  TaskRecord t;
  try {
    t.task_id = j.at("task_id").get<std::string>();
    t.requirement = j.at("requirement").get<std::string>();
    t.tests = j.at("tests").get<std::vector<std::string>>();
    if (j.contains("gold_apis") && !j["gold_apis"].is_null()) t.gold_apis = j["gold_apis"].get<std::vector<std::string>>();
    if (j.contains("entry_point") && !j["entry_point"].is_null()) t.entry_point = j["entry_point"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BenchmarkFormatError(where + ": " + e.what());
  }
  if (t.task_id.empty()) throw BenchmarkFormatError(where + ": empty task_id");
  if (trim(t.requirement).empty()) throw BenchmarkFormatError(where + ": empty requirement");
  if (t.tests.empty()) throw BenchmarkFormatError(where + ": task '" + t.task_id + "' has an empty test list");
  return t;
}

std::vector<TaskRecord> parse_benchmark(const std::string& text, const std::string& origin) {
  std::vector<TaskRecord> tasks;
  std::set<std::string> ids;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto where = origin + ":" + std::to_string(i + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw BenchmarkFormatError(where + ": " + e.what());
    }
    auto task = task_from_json(j, where);
    if (!ids.insert(task.task_id).second) throw BenchmarkFormatError(where + ": duplicate task_id '" + task.task_id + "'");
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<TaskRecord> load_benchmark(const std::filesystem::path& path) {
  return parse_benchmark(read_file(path), path.string());
}

void seeded_shuffle(std::vector<TaskRecord>& tasks, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = tasks.size(); i > 1; --i) {
    // Rejection sampling for an unbiased index in [0, i).
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(tasks[i - 1], tasks[r % bound]);
  }
}

}  // namespace memcoder
