#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memcoder/benchmark.hpp"
#include "memcoder/catalog.hpp"
#include "memcoder/chat.hpp"
#include "memcoder/embedding.hpp"
#include "memcoder/execution.hpp"
#include "memcoder/llm.hpp"
#include "memcoder/memory_store.hpp"
#include "memcoder/prompt.hpp"
#include "memcoder/reflector.hpp"
#include "memcoder/retrieval.hpp"
#include "memcoder/templates.hpp"

namespace memcoder {

struct RunConfig {
  Mode mode = Mode::kMemcoder;
  std::size_t n_samples = 10;
  RetrievalConfig retrieval;
  WeightParams weights;
  std::size_t snippet_cap = 4;
  std::size_t accum_snippet_cap = 16;
  std::int64_t timeout_ms = kDefaultTimeoutMs;
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 4096;
  std::string model;
  ReflectorConfig reflector;
  std::size_t max_prompt_tokens = 0;
  int workers = 1;

  // Throws ConfigError naming the offending parameter.
  void validate() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct SampleResult {
  std::string code;
  ExecutionFeedback feedback;
  std::vector<GuidelineRef> used_guidelines;
  std::optional<std::string> generation_error;  // set when no code was produced
};

struct MemoryDelta {
  std::size_t task_entries_added = 0;
  std::size_t guidelines_added = 0;
  std::size_t guidelines_replaced = 0;
  std::size_t guidelines_removed = 0;
  std::size_t candidates_discarded = 0;
  std::size_t weight_updates = 0;
  std::size_t snippets_appended = 0;
  friend bool operator==(const MemoryDelta&, const MemoryDelta&) = default;
};

struct TaskResult {
  std::string task_id;
  std::uint64_t position = 0;
  std::size_t n_samples = 0;
  std::size_t c_pass = 0;
  std::size_t c_exec = 0;
  std::vector<SampleResult> samples;
  std::vector<std::uint64_t> retrieved_entries;
  std::vector<std::string> candidate_apis;
  std::string prompt_hash;
  MemoryDelta delta;

  // Throws InvariantError unless c_pass <= c_exec <= n_samples.
  void validate() const;
};

nlohmann::json to_json(const TaskResult& result);
TaskResult task_result_from_json(const nlohmann::json& j, const std::string& where);
std::vector<TaskResult> load_results(const std::filesystem::path& path);
// One compact JSON document per line.
std::string results_line(const TaskResult& result);

struct Services {
  LlmBackend& llm;
  EmbeddingProvider& embedder;
  Runner& runner;
  const TemplateSet& templates;
  std::shared_ptr<const LibraryCatalog> catalog;  // indexed with `embedder`
};

// Drives forward generation and backward evolution over a task stream.
// Memory writes of a task happen after all of its samples, in sample order.
class EvolutionEngine {
 public:
  using PromptObserver = std::function<void(const TaskRecord&, const MessageList&)>;
  using TaskObserver = std::function<void(const TaskResult&, const MemoryStore&)>;

  EvolutionEngine(Services services, RunConfig config, MemoryStore memory = {});

  TaskResult run_task(const TaskRecord& task);
  // Calls `after_each` once per task with the memory state that task i+1
  // will see.
  std::vector<TaskResult> run_stream(const std::vector<TaskRecord>& tasks, const TaskObserver& after_each = {});

  void set_prompt_observer(PromptObserver observer) { on_prompt_ = std::move(observer); }
  const MemoryStore& memory() const noexcept { return memory_; }
  const RunConfig& config() const noexcept { return config_; }
  const Reflector& reflector() const noexcept { return reflector_; }

 private:
  SampleResult run_sample(const TaskRecord& task, const MessageList& messages, std::size_t index,
                          const std::set<GuidelineRef>& used);
  void evolve(const TaskRecord& task, const EmbeddingVector& query, TaskResult& result);

  Services services_;
  RunConfig config_;
  MemoryStore memory_;
  Reflector reflector_;
  PromptObserver on_prompt_;
};

// Which memory dimensions a mode reads and writes.
bool mode_uses_task_memory(Mode mode) noexcept;
bool mode_routes_guidelines(Mode mode) noexcept;

}  // namespace memcoder
