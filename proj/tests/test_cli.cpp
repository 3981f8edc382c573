#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "cli_app.hpp"
#include "memcoder/evolution.hpp"
#include "memcoder/snapshot.hpp"
#include "memcoder/text_util.hpp"
#include "support.hpp"

using namespace memcoder;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = memcoder::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Compares against tests/golden/<name>; MEMCODER_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const std::string& actual) {
  const fs::path path = fs::path(MEMCODER_GOLDEN_DIR) / name;
  if (const char* u = std::getenv("MEMCODER_UPDATE_GOLDEN"); u && std::string(u) == "1") {
    write_file_atomic(path, actual);
  }
  REQUIRE(fs::exists(path));
  CHECK(read_file(path) == actual);
}

std::vector<std::string> toylib_run(const std::string& mode, const fs::path& out) {
  const auto d = testing::toylib_dir();
  return {"run", "--benchmark", (d / "benchmark.jsonl").string(), "--catalog", (d / "catalog.json").string(),
          "--fixtures", (d / "llm_fixtures.json").string(), "--runner-fixtures",
          (d / "runner_fixtures.json").string(), "--mode", mode, "--out", out.string()};
}

void write_results(const fs::path& path, std::size_t n, std::size_t c_pass) {
  TaskResult r;
  r.task_id = "only";
  r.n_samples = n;
  r.c_pass = c_pass;
  r.c_exec = c_pass;
  write_file_atomic(path, results_line(r));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help text is stable") {
    for (const auto& [name, args] : std::vector<std::pair<std::string, std::vector<std::string>>>{
             {"help.txt", {"--help"}},
             {"help_run.txt", {"run", "--help"}},
             {"help_eval.txt", {"eval", "--help"}},
             {"help_memory.txt", {"memory", "--help"}},
             {"help_replay.txt", {"replay", "--help"}}}) {
      CAPTURE(name);
      const auto r = invoke(args);
      CHECK(r.code == 0);
      check_golden(name, r.out);
    }
  }

  TEST_CASE("usage errors exit 2 and name the flag") {
    const auto r = invoke({"run", "--benchmark", "b.jsonl"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--catalog") != std::string::npos);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({}).code == 2);
  }

  TEST_CASE("bad mode and missing files map to exit codes") {
    testing::TempDir dir;
    auto args = toylib_run("memcoder", dir.path());
    args.back() = (dir / "out").string();
    auto bad_mode = args;
    bad_mode[10] = "oracle-ish";
    const auto r = invoke(bad_mode);
    CHECK(r.code == 2);
    CHECK(r.err.find("oracle-ish") != std::string::npos);
    auto missing = args;
    missing[2] = (dir / "nope.jsonl").string();
    CHECK(invoke(missing).code == 3);
  }

  TEST_CASE("accum run writes a manifest and a guideline-free snapshot") {
    testing::TempDir dir;
    const auto r = invoke(toylib_run("accum", dir.path()));
    REQUIRE(r.code == 0);
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    CHECK(manifest["options"]["config"]["mode"] == "accum");
    const auto snap = load_snapshot(dir / "snapshot.json");
    CHECK(snap.guideline_count() == 0);
    CHECK(snap.snippet_count() > 0);
    CHECK(load_results(dir / "results.jsonl").size() == 8);
  }

  TEST_CASE("eval formats percentages and rejects k > n") {
    testing::TempDir dir;
    write_results(dir / "r.jsonl", 10, 10);
    const auto r = invoke({"eval", "--results", (dir / "r.jsonl").string(), "--k", "1,5"});
    CHECK(r.code == 0);
    CHECK(r.out.find("100.00") != std::string::npos);
    const auto too_big = invoke({"eval", "--results", (dir / "r.jsonl").string(), "--k", "11"});
    CHECK(too_big.code == 2);
    CHECK(too_big.err.find("11") != std::string::npos);
    ::setenv("MEMCODER_K", "11", 1);
    CHECK(invoke({"eval", "--results", (dir / "r.jsonl").string()}).code == 2);
    ::unsetenv("MEMCODER_K");
    const auto js = invoke({"eval", "--results", (dir / "r.jsonl").string(), "--k", "1", "--json"});
    CHECK(nlohmann::json::parse(js.out)["instances"] == 1);
    write_file_atomic(dir / "bad.jsonl", "{\"task_id\": 1}\n");
    const auto bad = invoke({"eval", "--results", (dir / "bad.jsonl").string()});
    CHECK(bad.code == 3);
    CHECK(bad.err.find("bad.jsonl:1") != std::string::npos);
  }

  TEST_CASE("memory inspect and export") {
    testing::TempDir dir;
    save_snapshot(MemoryStore{}, dir / "empty.json");
    const auto fresh = invoke({"memory", "inspect", "--snapshot", (dir / "empty.json").string()});
    CHECK(fresh.code == 0);
    CHECK(fresh.out.rfind("0 task entries, 0 API entries", 0) == 0);

    MemoryStore m(testing::small_catalog(2));
    m.ensure_api_entry("lib.f1");
    m.apply_routing_action("lib.f1", routing::Add{"use ints"}, WeightParams{});
    const auto id = m.api_entries().at("lib.f1").guidelines[0].id;
    m.update_guideline_weights({GuidelineRef{"lib.f1", id}}, Outcome::kSuccess, WeightParams{});
    m.append_snippet("lib.f1", SnippetRecord{"lib.f1(1)", Outcome::kSuccess, std::nullopt, 0}, 4);
    m.append_snippet("lib.f1", SnippetRecord{"lib.f1('a')", Outcome::kFailure, "TypeError", 0}, 4);
    save_snapshot(m, dir / "one.json");
    const auto shown = invoke({"memory", "inspect", "--snapshot", (dir / "one.json").string()});
    CHECK(shown.out.find("1.2") != std::string::npos);
    CHECK(shown.out.find("lib.f1: 1 guidelines, 2 snippets") != std::string::npos);
    const auto digest = invoke({"memory", "export", "--snapshot", (dir / "one.json").string()});
    CHECK(digest.code == 0);
    check_golden("digest.md", digest.out);

    write_file_atomic(dir / "corrupt.json", "{\"schema_version\": 1}");
    CHECK(invoke({"memory", "inspect", "--snapshot", (dir / "corrupt.json").string()}).code == 3);
  }

  TEST_CASE("replay reproduces a run and flags changed inputs") {
    testing::TempDir dir;
    fs::copy_file(testing::toylib_dir() / "benchmark.jsonl", dir / "bench.jsonl");
    auto args = toylib_run("memcoder", dir / "run");
    args[2] = (dir / "bench.jsonl").string();
    REQUIRE(invoke(args).code == 0);
    const auto manifest = (dir / "run" / "manifest.json").string();
    const auto ok = invoke({"replay", "--manifest", manifest});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("results: identical") != std::string::npos);
    CHECK(ok.out.find("snapshot: identical") != std::string::npos);
    CHECK(read_file(dir / "run" / "results.jsonl") == read_file(dir / "run" / "replay" / "results.jsonl"));

    // A blank line leaves the tasks unchanged but not the input hash.
    write_file_atomic(dir / "bench.jsonl", read_file(dir / "bench.jsonl") + "\n");
    const auto changed = invoke({"replay", "--manifest", manifest, "--out", (dir / "again").string()});
    CHECK(changed.code == 4);
    CHECK(changed.out.find("input benchmark changed") != std::string::npos);
    CHECK(changed.out.find("results: identical") != std::string::npos);
  }
}
