#include "memcoder/evolution.hpp"

#include <cmath>

#include "memcoder/error.hpp"
#include "memcoder/hash.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

using nlohmann::json;

bool mode_uses_task_memory(Mode mode) noexcept {
  return mode == Mode::kMemcoder || mode == Mode::kNoApiMem || mode == Mode::kAccum;
}

bool mode_routes_guidelines(Mode mode) noexcept { return mode_injects_guidelines(mode); }

void RunConfig::validate() const {
  if (n_samples == 0) throw ConfigError("n_samples must be >= 1");
  if (retrieval.k_doc == 0) throw ConfigError("k_doc must be >= 1");
  if (snippet_cap == 0) throw ConfigError("snippet_cap must be >= 1");
  if (accum_snippet_cap == 0) throw ConfigError("accum_snippet_cap must be >= 1");
  if (timeout_ms <= 0) throw ConfigError("timeout_ms must be positive");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  weights.validate();
  ChatRequest probe;
  probe.temperature = temperature;
  probe.top_p = top_p;
  probe.max_tokens = max_tokens;
  probe.validate();
}

json RunConfig::to_json() const {
  return json{
      {"mode", memcoder::to_string(mode)},
      {"n_samples", n_samples},
      {"k_task", retrieval.k_task},
      {"k_doc", retrieval.k_doc},
      {"guidelines_per_api", retrieval.guidelines_per_api},
      {"snippets_per_api", retrieval.snippets_per_api},
      {"w_init", weights.w_init},
      {"w_reward", weights.reward},
      {"w_penalty", weights.penalty},
      {"w_min", weights.w_min},
      {"snippet_cap", snippet_cap},
      {"accum_snippet_cap", accum_snippet_cap},
      {"timeout_ms", timeout_ms},
      {"temperature", temperature},
      {"top_p", top_p},
      {"max_tokens", max_tokens},
      {"model", model},
      {"reflect_temperature", reflector.temperature},
      {"reflect_top_p", reflector.top_p},
      {"reflect_max_tokens", reflector.max_tokens},
      {"max_prompt_tokens", max_prompt_tokens},
      {"workers", workers},
  };
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    c.mode = mode_from_string(j.at("mode").get<std::string>());
    c.n_samples = j.at("n_samples").get<std::size_t>();
    c.retrieval.k_task = j.at("k_task").get<std::size_t>();
    c.retrieval.k_doc = j.at("k_doc").get<std::size_t>();
    c.retrieval.guidelines_per_api = j.at("guidelines_per_api").get<std::size_t>();
    c.retrieval.snippets_per_api = j.at("snippets_per_api").get<std::size_t>();
    c.weights.w_init = j.at("w_init").get<double>();
    c.weights.reward = j.at("w_reward").get<double>();
    c.weights.penalty = j.at("w_penalty").get<double>();
    c.weights.w_min = j.at("w_min").get<double>();
    c.snippet_cap = j.at("snippet_cap").get<std::size_t>();
    c.accum_snippet_cap = j.at("accum_snippet_cap").get<std::size_t>();
    c.timeout_ms = j.at("timeout_ms").get<std::int64_t>();
    c.temperature = j.at("temperature").get<double>();
    c.top_p = j.at("top_p").get<double>();
    c.max_tokens = j.at("max_tokens").get<int>();
    c.model = j.at("model").get<std::string>();
    c.reflector.temperature = j.at("reflect_temperature").get<double>();
    c.reflector.top_p = j.at("reflect_top_p").get<double>();
    c.reflector.max_tokens = j.at("reflect_max_tokens").get<int>();
    c.reflector.model = c.model;
    c.max_prompt_tokens = j.at("max_prompt_tokens").get<std::size_t>();
    c.workers = j.at("workers").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return c;
}

void TaskResult::validate() const {
  if (!(c_pass <= c_exec && c_exec <= n_samples)) {
    throw InvariantError("task " + task_id + ": expected c_pass <= c_exec <= n_samples, got " + std::to_string(c_pass) +
                         ", " + std::to_string(c_exec) + ", " + std::to_string(n_samples));
  }
  if (!samples.empty() && samples.size() != n_samples) {
    throw InvariantError("task " + task_id + ": sample count differs from n_samples");
  }
}

json to_json(const TaskResult& r) {
  json samples = json::array();
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    json used = json::array();
    for (const auto& g : s.used_guidelines) used.push_back(json{{"api", g.api_name}, {"id", raw(g.id)}});
    json js{{"index", i}, {"code", s.code}, {"feedback", to_json(s.feedback)}, {"used_guideline_ids", used}};
    if (s.generation_error) js["generation_error"] = *s.generation_error;
    samples.push_back(std::move(js));
  }
  const auto& d = r.delta;
  return json{
      {"task_id", r.task_id},
      {"position", r.position},
      {"n_samples", r.n_samples},
      {"c_pass", r.c_pass},
      {"c_exec", r.c_exec},
      {"retrieved_entries", r.retrieved_entries},
      {"candidate_apis", r.candidate_apis},
      {"prompt_hash", r.prompt_hash},
      {"memory_delta",
       {{"task_entries_added", d.task_entries_added},
        {"guidelines_added", d.guidelines_added},
        {"guidelines_replaced", d.guidelines_replaced},
        {"guidelines_removed", d.guidelines_removed},
        {"candidates_discarded", d.candidates_discarded},
        {"weight_updates", d.weight_updates},
        {"snippets_appended", d.snippets_appended}}},
      {"samples", samples},
  };
}

TaskResult task_result_from_json(const json& j, const std::string& where) {
  TaskResult r;
  try {
    r.task_id = j.at("task_id").get<std::string>();
    r.n_samples = j.at("n_samples").get<std::size_t>();
    r.c_pass = j.at("c_pass").get<std::size_t>();
    r.c_exec = j.at("c_exec").get<std::size_t>();
    r.position = j.value("position", std::uint64_t{0});
    if (j.contains("retrieved_entries")) r.retrieved_entries = j["retrieved_entries"].get<std::vector<std::uint64_t>>();
    if (j.contains("candidate_apis")) r.candidate_apis = j["candidate_apis"].get<std::vector<std::string>>();
    r.prompt_hash = j.value("prompt_hash", std::string());
    if (j.contains("memory_delta")) {
      const auto& d = j["memory_delta"];
      r.delta.task_entries_added = d.value("task_entries_added", std::size_t{0});
      r.delta.guidelines_added = d.value("guidelines_added", std::size_t{0});
      r.delta.guidelines_replaced = d.value("guidelines_replaced", std::size_t{0});
      r.delta.guidelines_removed = d.value("guidelines_removed", std::size_t{0});
      r.delta.candidates_discarded = d.value("candidates_discarded", std::size_t{0});
      r.delta.weight_updates = d.value("weight_updates", std::size_t{0});
      r.delta.snippets_appended = d.value("snippets_appended", std::size_t{0});
    }
    if (j.contains("samples")) {
      for (const auto& js : j["samples"]) {
        SampleResult s;
        s.code = js.at("code").get<std::string>();
        s.feedback = feedback_from_json(js.at("feedback"), where + ".samples");
        for (const auto& g : js.at("used_guideline_ids")) {
          s.used_guidelines.push_back(GuidelineRef{g.at("api").get<std::string>(), GuidelineId{g.at("id").get<std::uint64_t>()}});
        }
        if (js.contains("generation_error")) s.generation_error = js["generation_error"].get<std::string>();
        r.samples.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
  try {
    r.validate();
  } catch (const InvariantError& e) {
    throw InvariantError(where + ": " + e.what());
  }
  return r;
}

std::vector<TaskResult> load_results(const std::filesystem::path& path) {
  std::vector<TaskResult> out;
  const auto lines = split_lines(read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(i + 1);
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": " + e.what());
    }
    out.push_back(task_result_from_json(j, where));
  }
  return out;
}

std::string results_line(const TaskResult& result) { return to_json(result).dump() + "\n"; }

EvolutionEngine::EvolutionEngine(Services services, RunConfig config, MemoryStore memory)
    : services_(services),
      config_(std::move(config)),
      memory_(std::move(memory)),
      reflector_(services.llm, services.templates, config_.reflector) {
  config_.validate();
  if (!services_.catalog) throw ConfigError("no catalog configured");
  if (!services_.catalog->indexed()) throw ConfigError("catalog has no embedding index");
  if (!services_.catalog->empty() &&
      services_.catalog->doc_embeddings().front().dimension() != services_.embedder.dimension()) {
    throw ConfigError("catalog index dimension differs from the embedding provider");
  }
  if (!memory_.task_entries().empty() &&
      memory_.task_entries().front().requirement_embedding.dimension() != services_.embedder.dimension()) {
    throw InvariantError("snapshot embeddings have dimension " +
                         std::to_string(memory_.task_entries().front().requirement_embedding.dimension()) +
                         " but the provider produces " + std::to_string(services_.embedder.dimension()));
  }
  memory_.bind_catalog(services_.catalog);
}

SampleResult EvolutionEngine::run_sample(const TaskRecord& task, const MessageList& messages, std::size_t index,
                                         const std::set<GuidelineRef>& used) {
  SampleResult s;
  s.used_guidelines.assign(used.begin(), used.end());
  ChatRequest request;
  request.messages = messages;
  request.temperature = config_.temperature;
  request.top_p = config_.top_p;
  request.max_tokens = config_.max_tokens;
  request.model = config_.model;
  const int total = static_cast<int>(task.tests.size());
  try {
    s.code = extract_code(services_.llm.complete(request, index).text);
  } catch (const std::exception& e) {
    s.generation_error = e.what();
    s.feedback = ExecutionFeedback::synthetic_failure(std::string("generation failed: ") + e.what(), total);
    return s;
  }
  try {
    s.feedback = execute_candidate(services_.runner, s.code, task.tests, config_.timeout_ms);
  } catch (const std::exception& e) {
    s.feedback = ExecutionFeedback::synthetic_failure(std::string("execution failed: ") + e.what(), total);
  }
  return s;
}

TaskResult EvolutionEngine::run_task(const TaskRecord& task) {
  if (task.tests.empty()) throw BenchmarkFormatError("task '" + task.task_id + "' has an empty test list");
  const auto& catalog = *services_.catalog;
  const Mode mode = config_.mode;

  TaskResult result;
  result.task_id = task.task_id;
  result.position = memory_.seq_counter();
  result.n_samples = config_.n_samples;

  // Forward phase: one retrieval snapshot shared by every sample.
  const auto query = services_.embedder.embed(task.requirement);
  GenerationContext context;
  context.requirement = task.requirement;
  if (mode == Mode::kOracle) {
    if (!task.gold_apis) throw BenchmarkFormatError("task '" + task.task_id + "' has no gold_apis for oracle mode");
    std::vector<ApiDoc> gold;
    for (const auto& name : *task.gold_apis) {
      if (!catalog.contains(name)) {
        throw BenchmarkFormatError("task '" + task.task_id + "' gold api '" + name + "' is not in the catalog");
      }
      gold.push_back(catalog.doc(name));
      result.candidate_apis.push_back(name);
    }
    context.gold_docs = std::move(gold);
  } else if (mode != Mode::kVanilla) {
    std::vector<ScoredTask> retrieved;
    if (mode_uses_task_memory(mode)) retrieved = retrieve_similar_tasks(memory_, query, config_.retrieval.k_task);
    const auto doc_apis = retrieve_docs(catalog, query, config_.retrieval.k_doc);
    context = build_context(task.requirement, retrieved, doc_apis, memory_, catalog, config_.retrieval);
    context = fit_to_budget(std::move(context), mode, services_.templates, config_.max_prompt_tokens);
    for (const auto& block : context.task_blocks) result.retrieved_entries.push_back(raw(block.entry_id));
    for (const auto& block : context.api_blocks) result.candidate_apis.push_back(block.api_name);
  }
  const auto messages = render_prompt(context, mode, services_.templates);
  const auto used = injected_guidelines(context, mode);
  result.prompt_hash = request_fingerprint(messages, 0);
  if (on_prompt_) on_prompt_(task, messages);

  result.samples.resize(config_.n_samples);
  const auto n = static_cast<std::int64_t>(config_.n_samples);
#pragma omp parallel for schedule(dynamic) num_threads(config_.workers) if (config_.workers > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    result.samples[static_cast<std::size_t>(i)] = run_sample(task, messages, static_cast<std::size_t>(i), used);
  }
  for (const auto& s : result.samples) {
    if (s.feedback.executed) ++result.c_exec;
    if (s.feedback.success()) ++result.c_pass;
  }
  result.validate();

  if (mode_evolves(mode)) {
    evolve(task, query, result);
    memory_.advance_seq();
  }
  return result;
}

void EvolutionEngine::evolve(const TaskRecord& task, const EmbeddingVector& query, TaskResult& result) {
  const Mode mode = config_.mode;
  const auto& catalog = *services_.catalog;
  auto& delta = result.delta;
  for (const auto& sample : result.samples) {
    const bool generated = !sample.generation_error.has_value();
    const auto invoked = generated ? extract_invoked_apis(sample.code, catalog) : std::set<std::string>{};

    if (mode_uses_task_memory(mode)) {
      TaskMemoryEntry entry;
      entry.requirement = task.requirement;
      entry.requirement_embedding = query;
      entry.code = sample.code;
      entry.feedback = sample.feedback;
      entry.used_apis = invoked;
      entry.task_guideline = generated ? reflector_.reflect_task(task.requirement, sample.code, sample.feedback, invoked)
                                       : fallback_task_guideline(invoked, sample.feedback);
      entry.created_seq = result.position;
      memory_.insert_task_entry(std::move(entry));
      ++delta.task_entries_added;
    }

    if (mode == Mode::kNoApiMem) continue;

    const bool routes = mode_routes_guidelines(mode);
    if (routes) {
      for (const auto& api : invoked) {
        const auto& entry = memory_.ensure_api_entry(api);
        auto candidate = reflector_.reflect_api(api, entry.doc, sample.code, sample.feedback);
        if (!candidate) continue;
        const auto action = reflector_.route_guideline(*candidate, entry.doc, entry.guidelines);
        switch (memory_.apply_routing_action(api, action, config_.weights)) {
          case RoutingEffect::kNone: ++delta.candidates_discarded; break;
          case RoutingEffect::kAdded: ++delta.guidelines_added; break;
          case RoutingEffect::kReplaced: ++delta.guidelines_replaced; break;
          case RoutingEffect::kRemovedOnly: ++delta.guidelines_removed; break;
        }
      }
    }

    const std::size_t cap = mode == Mode::kAccum ? config_.accum_snippet_cap : config_.snippet_cap;
    for (const auto& api : invoked) {
      memory_.ensure_api_entry(api);
      SnippetRecord record;
      record.code = sample.code;
      record.outcome = sample.feedback.status;
      if (!sample.feedback.success()) {
        record.error_message = sample.feedback.traceback && !sample.feedback.traceback->empty()
                                   ? tail_lines(*sample.feedback.traceback, kFeedbackTailLines)
                                   : sample.feedback.summary(0);
      }
      record.source_seq = result.position;
      memory_.append_snippet(api, std::move(record), cap);
      ++delta.snippets_appended;
    }

    if (routes) {
      // Guidelines replaced by routing above are no longer credited.
      std::set<GuidelineRef> live;
      for (const auto& ref : sample.used_guidelines) {
        if (memory_.contains_guideline(ref)) live.insert(ref);
      }
      memory_.update_guideline_weights(live, sample.feedback.status, config_.weights);
      delta.weight_updates += live.size();
    }
  }
}

std::vector<TaskResult> EvolutionEngine::run_stream(const std::vector<TaskRecord>& tasks,
                                                    const TaskObserver& after_each) {
  std::vector<TaskResult> results;
  results.reserve(tasks.size());
  for (const auto& task : tasks) {
    results.push_back(run_task(task));
    if (after_each) after_each(results.back(), memory_);
  }
  return results;
}

}  // namespace memcoder
