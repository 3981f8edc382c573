#pragma once

// A small synthetic library ("toylib") together with a simulated model and
// runner for it. The simulated model writes correct code for a task only
// when the usage guideline of that task's tricky API is present in its
// prompt; otherwise it falls into the API's pitfall. Used to author the
// scripted fixtures under data/toylib/.

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "memcoder/benchmark.hpp"
#include "memcoder/catalog.hpp"
#include "memcoder/execution.hpp"
#include "memcoder/llm.hpp"
#include "memcoder/templates.hpp"

namespace toylib {

struct TaskSpec {
  std::string task_id;
  std::string requirement;
  std::string tricky_api;
  std::vector<std::string> gold_apis;
  std::vector<std::string> tests;
  std::string correct_code;
  std::string assert_bug_code;
  std::string assert_bug_traceback;
  std::string raise_bug_code;
  std::string raise_bug_traceback;
  std::string lesson;
};

const std::vector<TaskSpec>& tasks();
memcoder::LibraryCatalog catalog();
std::vector<memcoder::TaskRecord> benchmark();
// tricky api -> the guideline text the simulated reflector proposes for it
const std::map<std::string, std::string>& api_guidelines();

enum class Variant { kCorrect, kAssertBug, kRaiseBug, kSlip };

// Which variant sample `index` of a task produces.
Variant variant_for(const TaskSpec& task, std::size_t index, bool guideline_in_prompt);
std::string candidate_code(const TaskSpec& task, Variant variant, std::size_t index);

class World {
 public:
  explicit World(const memcoder::TemplateSet& templates);
  // Answers generation, reflection and routing requests.
  std::string respond(const memcoder::ChatRequest& request, std::size_t sample_index) const;
  // Runner response document for a candidate this world generated.
  nlohmann::json execute(const memcoder::RunnerRequest& request) const;

 private:
  const TaskSpec* task_by_requirement(const std::string& requirement) const;
  const memcoder::TemplateSet& templates_;
  std::map<std::string, nlohmann::json> outcomes_;  // candidate fingerprint -> response
};

// Runner backed by World::execute that records every response in the stub
// fixture format.
class WorldRunner final : public memcoder::Runner {
 public:
  explicit WorldRunner(const World& world) : world_(world) {}
  std::string run(const memcoder::RunnerRequest& request) override;
  std::string describe() const override { return "toylib-world"; }
  std::map<std::string, nlohmann::json> recorded() const;

 private:
  const World& world_;
  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> recorded_;
};

}  // namespace toylib

namespace toylib {

struct FixtureSet {
  std::string catalog_json;
  std::string benchmark_jsonl;
  std::string llm_fixtures_json;
  std::string runner_fixtures_json;
};

inline constexpr std::size_t kFixtureSamples = 10;

// Runs every mode over the toylib stream with default settings and
// `kFixtureSamples` samples, recording each model reply and runner response.
FixtureSet generate_fixtures(const memcoder::TemplateSet& templates);
void write_fixtures(const FixtureSet& set, const std::filesystem::path& dir);

}  // namespace toylib
