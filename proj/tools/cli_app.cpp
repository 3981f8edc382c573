#include "cli_app.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "memcoder/error.hpp"
#include "memcoder/hash.hpp"
#include "memcoder/metrics.hpp"
#include "memcoder/snapshot.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

std::string path_string(const fs::path& p) { return p.empty() ? std::string() : fs::absolute(p).lexically_normal().string(); }

json input_entry(const fs::path& p) {
  if (p.empty()) return nullptr;
  if (!fs::exists(p)) throw IoError("input not found: " + p.string());
  return json{{"path", path_string(p)}, {"hash", file_hash(p)}};
}

std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", w);
  return buf;
}

fs::path templates_dir(const RunOptions& o) { return o.templates.empty() ? TemplateSet::default_dir() : o.templates; }

}  // namespace

json options_to_json(const RunOptions& o) {
  return json{
      {"config", o.config.to_json()},
      {"benchmark", path_string(o.benchmark)},
      {"catalog", path_string(o.catalog)},
      {"snapshot_in", path_string(o.snapshot_in)},
      {"out_dir", path_string(o.out_dir)},
      {"templates", path_string(templates_dir(o))},
      {"fixtures", path_string(o.fixtures)},
      {"runner_fixtures", path_string(o.runner_fixtures)},
      {"runner", o.runner == "stub" ? o.runner : path_string(o.runner)},
      {"embedder", o.embedder},
      {"embed_dim", o.embed_dim},
      {"llm_base_url", o.llm_base_url},
      {"embed_base_url", o.embed_base_url},
      {"embed_model", o.embed_model},
      {"seed", o.seed},
      {"shuffle", o.shuffle},
      {"retries", o.retries},
      {"requests_per_second", o.requests_per_second},
  };
}

RunOptions options_from_json(const json& j) {
  RunOptions o;
  try {
    o.config = RunConfig::from_json(j.at("config"));
    o.benchmark = j.at("benchmark").get<std::string>();
    o.catalog = j.at("catalog").get<std::string>();
    o.snapshot_in = j.at("snapshot_in").get<std::string>();
    o.out_dir = j.at("out_dir").get<std::string>();
    o.templates = j.at("templates").get<std::string>();
    o.fixtures = j.at("fixtures").get<std::string>();
    o.runner_fixtures = j.at("runner_fixtures").get<std::string>();
    o.runner = j.at("runner").get<std::string>();
    o.embedder = j.at("embedder").get<std::string>();
    o.embed_dim = j.at("embed_dim").get<std::size_t>();
    o.llm_base_url = j.at("llm_base_url").get<std::string>();
    o.embed_base_url = j.at("embed_base_url").get<std::string>();
    o.embed_model = j.at("embed_model").get<std::string>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.shuffle = j.at("shuffle").get<bool>();
    o.retries = j.at("retries").get<int>();
    o.requests_per_second = j.at("requests_per_second").get<double>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return o;
}

json execute_run(const RunOptions& o, std::ostream& out) {
  if (o.benchmark.empty()) throw ConfigError("--benchmark is required");
  if (o.catalog.empty()) throw ConfigError("--catalog is required");
  o.config.validate();

  const auto templates = TemplateSet::load(templates_dir(o));
  auto tasks = load_benchmark(o.benchmark);
  if (o.shuffle) seeded_shuffle(tasks, o.seed);

  std::unique_ptr<EmbeddingProvider> embedder;
  if (o.embedder == "deterministic") {
    if (o.embed_dim == 0) throw ConfigError("--embed-dim must be positive");
    embedder = std::make_unique<DeterministicEmbedder>(o.embed_dim);
  } else if (o.embedder == "http") {
    HttpEmbedderConfig ec;
    ec.base_url = o.embed_base_url;
    ec.model = o.embed_model;
    ec.api_key = o.embed_api_key;
    ec.max_retries = o.retries;
    if (ec.base_url.empty()) throw ConfigError("--embedder http needs --embed-base-url (or MEMCODER_EMBED_BASE_URL)");
    embedder = std::make_unique<HttpEmbedder>(ec);
  } else {
    throw ConfigError("--embedder must be 'deterministic' or 'http', got '" + o.embedder + "'");
  }

  auto catalog = std::make_shared<LibraryCatalog>(LibraryCatalog::load(o.catalog));
  catalog->build_index(*embedder);

  std::unique_ptr<LlmBackend> llm;
  if (!o.fixtures.empty()) {
    llm = std::make_unique<ScriptedBackend>(load_llm_fixtures(o.fixtures));
  } else if (!o.llm_base_url.empty()) {
    HttpLlmConfig lc;
    lc.base_url = o.llm_base_url;
    lc.api_key = o.llm_api_key;
    lc.model = o.config.model;
    lc.max_retries = o.retries;
    lc.requests_per_second = o.requests_per_second;
    llm = std::make_unique<HttpBackend>(lc);
  } else {
    throw ConfigError("no model backend: pass --fixtures for scripted replies or --llm-base-url for an HTTP endpoint");
  }

  std::unique_ptr<Runner> runner;
  if (o.runner == "stub") {
    runner = std::make_unique<StubRunner>(o.runner_fixtures.empty() ? std::map<std::string, json>{}
                                                                : load_stub_fixtures(o.runner_fixtures));
  } else {
    runner = std::make_unique<ProcessRunner>(o.runner);
  }

  MemoryStore memory;
  if (!o.snapshot_in.empty()) memory = load_snapshot(o.snapshot_in, o.config.weights);

  EvolutionEngine engine(Services{*llm, *embedder, *runner, templates, catalog}, o.config, std::move(memory));

  fs::create_directories(o.out_dir);
  const auto results_path = o.out_dir / "results.jsonl";
  const auto snapshot_path = o.out_dir / "snapshot.json";
  const auto manifest_path = o.out_dir / "manifest.json";
  std::string durable = o.snapshot_in.empty() ? std::string("none") : o.snapshot_in.string();
  std::string results_text;
  auto checkpoint = [&](const TaskResult& result, const MemoryStore& mem) {
    results_text += results_line(result);
    try {
      write_file_atomic(results_path, results_text);
      save_snapshot(mem, snapshot_path);
    } catch (const IoError& e) {
      throw IoError(std::string(e.what()) + " (last durable snapshot: " + durable + ")");
    }
    durable = snapshot_path.string();
    out << result.task_id << "  pass " << result.c_pass << "/" << result.n_samples << "  exec " << result.c_exec << "/"
        << result.n_samples << "\n";
  };
  const auto results = engine.run_stream(tasks, checkpoint);
  // An empty stream still leaves a results file and the (unchanged) snapshot.
  write_file_atomic(results_path, results_text);
  save_snapshot(engine.memory(), snapshot_path);

  json manifest{
      {"manifest_version", kManifestVersion},
      {"options", options_to_json(o)},
      {"inputs",
       {{"benchmark", input_entry(o.benchmark)},
        {"catalog", input_entry(o.catalog)},
        {"fixtures", input_entry(o.fixtures)},
        {"runner_fixtures", input_entry(o.runner_fixtures)},
        {"snapshot_in", input_entry(o.snapshot_in)},
        {"templates", {{"path", path_string(templates.dir())}, {"version", templates.version()}, {"hash", templates.content_hash()}}}}},
      {"components", {{"llm", llm->describe()}, {"embedder", embedder->describe()}, {"runner", runner->describe()}}},
      {"outputs",
       {{"results", {{"file", "results.jsonl"}, {"hash", file_hash(results_path)}}},
        {"snapshot", {{"file", "snapshot.json"}, {"hash", file_hash(snapshot_path)}}}}},
  };
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");

  std::vector<std::size_t> ks;
  for (std::size_t k : {1, 3, 5}) {
    if (k <= o.config.n_samples) ks.push_back(k);
  }
  if (!results.empty()) out << format_table(aggregate(results, ks));
  out << "wrote " << results_path.string() << ", " << snapshot_path.string() << ", " << manifest_path.string() << "\n";
  return manifest;
}

namespace {

int replay(const fs::path& manifest_path, const fs::path& out_override, std::ostream& out) {
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw ParseError("manifest " + manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("manifest_version", 0) != kManifestVersion) throw ConfigError("unsupported manifest version");
  auto options = options_from_json(manifest.at("options"));
  if (const char* key = std::getenv("MEMCODER_LLM_API_KEY")) options.llm_api_key = key;
  if (const char* key = std::getenv("MEMCODER_EMBED_API_KEY")) options.embed_api_key = key;
  const auto original_out = options.out_dir;
  options.out_dir = out_override.empty() ? manifest_path.parent_path() / "replay" : out_override;
  if (fs::absolute(options.out_dir).lexically_normal() == fs::absolute(original_out).lexically_normal()) {
    throw ConfigError("replay output directory must differ from the recorded one");
  }

  bool same = true;
  for (const auto& [name, entry] : manifest.at("inputs").items()) {
    if (entry.is_null()) continue;
    const auto now = name == "templates" ? TemplateSet::load(entry.at("path").get<std::string>()).content_hash()
                                         : file_hash(entry.at("path").get<std::string>());
    if (now != entry.at("hash").get<std::string>()) {
      out << "input " << name << " changed since the recorded run\n";
      same = false;
    }
  }
  std::ostringstream run_log;
  const auto fresh = execute_run(options, run_log);
  for (const auto& name : {"results", "snapshot"}) {
    const auto before = manifest["outputs"][name]["hash"].get<std::string>();
    const auto after = fresh["outputs"][name]["hash"].get<std::string>();
    out << name << ": " << (before == after ? "identical" : "DIFFERS") << " (" << after << ")\n";
    same = same && before == after;
  }
  return same ? 0 : to_int(ExitCode::kInvariant);
}

void inspect(const MemoryStore& m, std::ostream& out) {
  out << m.task_entries().size() << " task entries, " << m.api_entries().size() << " API entries\n";
  out << "seq_counter " << m.seq_counter() << ", " << m.guideline_count() << " guidelines, " << m.snippet_count()
      << " snippets\n";
  for (const auto& [name, entry] : m.api_entries()) {
    out << name << ": " << entry.guidelines.size() << " guidelines, " << entry.snippets.size() << " snippets\n";
    auto gs = entry.guidelines;
    std::stable_sort(gs.begin(), gs.end(), [](const Guideline& a, const Guideline& b) { return a.weight > b.weight; });
    for (const auto& g : gs) out << "  " << format_weight(g.weight) << "  " << g.text << "\n";
  }
}

std::string export_digest(const MemoryStore& m) {
  std::ostringstream out;
  out << "# Memory digest\n\n";
  out << m.task_entries().size() << " task entries, " << m.api_entries().size() << " API entries\n";
  for (const auto& [name, entry] : m.api_entries()) {
    out << "\n## " << name << "\n\n";
    out << "`" << (entry.doc.signature.empty() ? name : entry.doc.signature) << "`\n\n";
    if (entry.guidelines.empty()) {
      out << "No guidelines.\n";
    } else {
      auto gs = entry.guidelines;
      std::stable_sort(gs.begin(), gs.end(), [](const Guideline& a, const Guideline& b) { return a.weight > b.weight; });
      for (const auto& g : gs) out << "- (w=" << format_weight(g.weight) << ") " << g.text << "\n";
    }
    std::size_t ok = 0;
    for (const auto& s : entry.snippets) ok += s.outcome == Outcome::kSuccess;
    out << "\nSnippets: " << entry.snippets.size() << " (" << ok << " Success, " << entry.snippets.size() - ok
        << " Failure)\n";
  }
  return out.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Closed-loop code generation with evolving task and API memory."};
  app.name("memcoder");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  RunOptions o;
  std::string mode = "memcoder";
  auto* run = app.add_subcommand("run", "Run a task stream and write results, snapshot and manifest");
  run->add_option("--benchmark", o.benchmark, "Benchmark JSON-lines file")->required()->envname("MEMCODER_BENCHMARK");
  run->add_option("--catalog", o.catalog, "Library catalog JSON")->required()->envname("MEMCODER_CATALOG");
  run->add_option("--mode", mode, "memcoder|vanilla|oracle|no_task_mem|no_api_mem|accum")
      ->capture_default_str()
      ->envname("MEMCODER_MODE");
  run->add_option("--n-samples", o.config.n_samples, "Samples per task")->capture_default_str()->envname("MEMCODER_N_SAMPLES");
  run->add_option("--k-task", o.config.retrieval.k_task, "Similar past tasks retrieved")
      ->capture_default_str()
      ->envname("MEMCODER_K_TASK");
  run->add_option("--k-doc", o.config.retrieval.k_doc, "API docs retrieved")->capture_default_str()->envname("MEMCODER_K_DOC");
  run->add_option("--guidelines", o.config.retrieval.guidelines_per_api, "Guidelines injected per API")
      ->capture_default_str()
      ->envname("MEMCODER_GUIDELINES");
  run->add_option("--snippets", o.config.retrieval.snippets_per_api, "Successful snippets injected per API")
      ->capture_default_str()
      ->envname("MEMCODER_SNIPPETS");
  run->add_option("--snippet-cap", o.config.snippet_cap, "Snippets retained per API")
      ->capture_default_str()
      ->envname("MEMCODER_SNIPPET_CAP");
  run->add_option("--accum-snippet-cap", o.config.accum_snippet_cap, "Snippets retained per API in accum mode")
      ->capture_default_str()
      ->envname("MEMCODER_ACCUM_SNIPPET_CAP");
  run->add_option("--w-init", o.config.weights.w_init, "Initial guideline weight")
      ->capture_default_str()
      ->envname("MEMCODER_W_INIT");
  run->add_option("--w-reward", o.config.weights.reward, "Weight added on Success")
      ->capture_default_str()
      ->envname("MEMCODER_W_REWARD");
  run->add_option("--w-penalty", o.config.weights.penalty, "Weight subtracted on Failure")
      ->capture_default_str()
      ->envname("MEMCODER_W_PENALTY");
  run->add_option("--w-min", o.config.weights.w_min, "Weight floor")->capture_default_str()->envname("MEMCODER_W_MIN");
  run->add_option("--timeout-ms", o.config.timeout_ms, "Per-test execution timeout")
      ->capture_default_str()
      ->envname("MEMCODER_TIMEOUT_MS");
  run->add_option("--max-prompt-tokens", o.config.max_prompt_tokens, "Prompt budget, 0 = unlimited")
      ->capture_default_str()
      ->envname("MEMCODER_MAX_PROMPT_TOKENS");
  run->add_option("--workers", o.config.workers, "Parallel samples within a task")
      ->capture_default_str()
      ->envname("MEMCODER_WORKERS");
  run->add_option("--snapshot-in", o.snapshot_in, "Start from this memory snapshot")->envname("MEMCODER_SNAPSHOT_IN");
  run->add_option("--out", o.out_dir, "Output directory")->capture_default_str()->envname("MEMCODER_OUT");
  run->add_option("--templates", o.templates, "Prompt template directory (default: bundled v1)")
      ->envname("MEMCODER_TEMPLATES");
  run->add_option("--fixtures", o.fixtures, "Scripted model replies (fingerprint -> text)")->envname("MEMCODER_FIXTURES");
  run->add_option("--llm-base-url", o.llm_base_url, "OpenAI-compatible endpoint")->envname("MEMCODER_LLM_BASE_URL");
  run->add_option("--llm-api-key", o.llm_api_key, "API key for --llm-base-url")->envname("MEMCODER_LLM_API_KEY");
  run->add_option("--llm-model", o.config.model, "Model name sent to the endpoint")->envname("MEMCODER_LLM_MODEL");
  run->add_option("--temperature", o.config.temperature, "Generation temperature")
      ->capture_default_str()
      ->envname("MEMCODER_TEMPERATURE");
  run->add_option("--top-p", o.config.top_p, "Generation nucleus mass")->capture_default_str()->envname("MEMCODER_TOP_P");
  run->add_option("--max-tokens", o.config.max_tokens, "Generation token limit")
      ->capture_default_str()
      ->envname("MEMCODER_MAX_TOKENS");
  run->add_option("--retries", o.retries, "HTTP retries")->capture_default_str()->envname("MEMCODER_RETRIES");
  run->add_option("--rps", o.requests_per_second, "HTTP requests per second, 0 = unlimited")
      ->capture_default_str()
      ->envname("MEMCODER_RPS");
  run->add_option("--embedder", o.embedder, "deterministic|http")->capture_default_str()->envname("MEMCODER_EMBEDDER");
  run->add_option("--embed-dim", o.embed_dim, "Dimension of the deterministic embedder")
      ->capture_default_str()
      ->envname("MEMCODER_EMBED_DIM");
  run->add_option("--embed-base-url", o.embed_base_url, "Embedding endpoint")->envname("MEMCODER_EMBED_BASE_URL");
  run->add_option("--embed-model", o.embed_model, "Embedding model")->envname("MEMCODER_EMBED_MODEL");
  run->add_option("--embed-api-key", o.embed_api_key, "API key for --embed-base-url")->envname("MEMCODER_EMBED_API_KEY");
  run->add_option("--runner", o.runner, "'stub' or path to a runner executable")
      ->capture_default_str()
      ->envname("MEMCODER_RUNNER");
  run->add_option("--runner-fixtures", o.runner_fixtures, "Stub runner responses (fingerprint -> response)")
      ->envname("MEMCODER_RUNNER_FIXTURES");
  run->add_option("--seed", o.seed, "Seed for --shuffle")->capture_default_str()->envname("MEMCODER_SEED");
  run->add_flag("--shuffle", o.shuffle, "Shuffle the task order with --seed")->envname("MEMCODER_SHUFFLE");

  std::string results_path;
  std::vector<std::size_t> ks{1, 3, 5};
  bool as_json = false;
  bool as_csv = false;
  auto* eval = app.add_subcommand("eval", "Compute Pass@k and Exec@k over a results file");
  eval->add_option("--results", results_path, "results.jsonl from a run")->required()->envname("MEMCODER_RESULTS");
  eval->add_option("--k", ks, "Comma-separated k values")->delimiter(',')->capture_default_str()->envname("MEMCODER_K");
  eval->add_flag("--json", as_json, "Emit the report as JSON")->envname("MEMCODER_EVAL_JSON");
  eval->add_flag("--csv", as_csv, "Emit per-instance rows as CSV")->envname("MEMCODER_EVAL_CSV");

  std::string snapshot_path;
  std::string export_out;
  auto* memory = app.add_subcommand("memory", "Inspect or export a memory snapshot");
  memory->require_subcommand(1);
  auto* inspect_cmd = memory->add_subcommand("inspect", "Print entry counts, guideline weights and snippet counts");
  inspect_cmd->add_option("--snapshot", snapshot_path, "Snapshot JSON")->required()->envname("MEMCODER_SNAPSHOT");
  auto* export_cmd = memory->add_subcommand("export", "Write guidelines as a markdown digest");
  export_cmd->add_option("--snapshot", snapshot_path, "Snapshot JSON")->required()->envname("MEMCODER_SNAPSHOT");
  export_cmd->add_option("--out", export_out, "Digest file (default: stdout)")->envname("MEMCODER_EXPORT_OUT");

  std::string manifest_path;
  std::string replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and compare its outputs");
  replay_cmd->add_option("--manifest", manifest_path, "manifest.json from a run")->required()->envname("MEMCODER_MANIFEST");
  replay_cmd->add_option("--out", replay_out, "Output directory (default: <manifest dir>/replay)")
      ->envname("MEMCODER_REPLAY_OUT");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "memcoder: " << e.what() << "\n";
    return to_int(ExitCode::kConfig);
  }

  try {
    if (*run) {
      o.config.mode = mode_from_string(mode);
      o.config.reflector.model = o.config.model;
      execute_run(o, out);
    } else if (*eval) {
      const auto report = aggregate(load_results(results_path), ks);
      if (as_json) {
        out << to_json(report).dump(2) << "\n";
      } else if (as_csv) {
        out << format_csv(report);
      } else {
        out << format_table(report);
      }
    } else if (*inspect_cmd) {
      inspect(load_snapshot(snapshot_path), out);
    } else if (*export_cmd) {
      const auto digest = export_digest(load_snapshot(snapshot_path));
      if (export_out.empty()) {
        out << digest;
      } else {
        write_file_atomic(export_out, digest);
      }
    } else if (*replay_cmd) {
      return replay(manifest_path, replay_out, out);
    }
  } catch (const Error& e) {
    err << "memcoder: error: " << e.what() << "\n";
    return to_int(e.exit_code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "memcoder: error: " << e.what() << "\n";
    return to_int(ExitCode::kIo);
  }
  return 0;
}

}  // namespace memcoder::cli
