#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memcoder/evolution.hpp"

namespace memcoder::cli {

struct RunOptions {
  RunConfig config;
  std::filesystem::path benchmark;
  std::filesystem::path catalog;
  std::filesystem::path snapshot_in;
  std::filesystem::path out_dir = "memcoder-out";
  std::filesystem::path templates;
  std::filesystem::path fixtures;
  std::filesystem::path runner_fixtures;
  std::string runner = "stub";
  std::string embedder = "deterministic";
  std::size_t embed_dim = 256;
  std::string llm_base_url;
  std::string llm_api_key;  // never written to manifests
  std::string embed_base_url;
  std::string embed_model;
  std::string embed_api_key;  // never written to manifests
  std::uint64_t seed = 0;
  bool shuffle = false;
  int retries = 3;
  double requests_per_second = 0.0;
};

nlohmann::json options_to_json(const RunOptions& options);
RunOptions options_from_json(const nlohmann::json& j);

// Runs the configured stream and writes results.jsonl, snapshot.json and
// manifest.json into out_dir. Returns the manifest.
nlohmann::json execute_run(const RunOptions& options, std::ostream& out);

// Entry point shared by the executable and the tests; args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace memcoder::cli
