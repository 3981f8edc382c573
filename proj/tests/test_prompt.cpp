#include <doctest.h>

#include <filesystem>

#include "memcoder/error.hpp"
#include "memcoder/prompt.hpp"
#include "memcoder/text_util.hpp"
#include "support.hpp"

using namespace memcoder;

namespace {

GenerationContext sample_context() {
  GenerationContext ctx;
  ctx.requirement = "REQ-SENTINEL: add two arrays";
  ctx.task_blocks.push_back(TaskBlock{TaskEntryId{1}, 0.9, "TASK-CODE-SENTINEL", "Success (1/1 tests passed)",
                                      "TASK-GUIDELINE-SENTINEL"});
  ApiBlock api;
  api.api_name = "lib.add";
  api.doc = ApiDoc{"lib.add", "lib.add(a, b)", "DOC-SENTINEL", std::nullopt};
  api.guidelines.push_back(Guideline{GuidelineId{3}, "API-GUIDELINE-SENTINEL", 1.0, 0});
  api.snippets.push_back(SnippetRecord{"SNIPPET-SENTINEL", Outcome::kSuccess, std::nullopt, 0});
  api.trajectories = api.snippets;
  api.trajectories.push_back(SnippetRecord{"FAILED-TRAJECTORY-SENTINEL", Outcome::kFailure, "ERR-SENTINEL", 1});
  ctx.api_blocks.push_back(api);
  ctx.used_guideline_ids.insert(GuidelineRef{"lib.add", GuidelineId{3}});
  ctx.gold_docs = std::vector<ApiDoc>{ApiDoc{"lib.gold", "lib.gold()", "GOLD-DOC-SENTINEL", std::nullopt}};
  return ctx;
}

bool has(const MessageList& m, const std::string& needle) { return m.at(1).content.find(needle) != std::string::npos; }

}  // namespace

TEST_SUITE("prompt") {
  TEST_CASE("template set loads with version and hash") {
    const auto& t = testing::templates();
    CHECK(t.version() == "v1");
    CHECK(t.content_hash().size() == 16);
    for (const auto& name : TemplateSet::required_names()) CHECK_NOTHROW(t.get(name));
    CHECK_THROWS_AS(t.get("nope"), ConfigError);
  }

  TEST_CASE("missing template file is a config error") {
    testing::TempDir dir;
    for (const auto& entry : std::filesystem::directory_iterator(TemplateSet::default_dir())) {
      std::filesystem::copy(entry.path(), dir / entry.path().filename().string());
    }
    CHECK_NOTHROW(TemplateSet::load(dir.path()));
    std::filesystem::remove(dir / "route_user.txt");
    CHECK_THROWS_AS(TemplateSet::load(dir.path()), ConfigError);
  }

  TEST_CASE("substitute is single pass and strict") {
    CHECK(substitute("a {{x}} b", {{"x", "{{y}}"}}) == "a {{y}} b");
    CHECK(substitute("{{x}}{{x}}", {{"x", "1"}}) == "11");
    CHECK_THROWS_AS(substitute("{{missing}}", {}), ConfigError);
  }

  TEST_CASE("render_prompt sentinels per mode") {
    const auto ctx = sample_context();
    const auto& t = testing::templates();

    const auto mem = render_prompt(ctx, Mode::kMemcoder, t);
    CHECK(has(mem, "TASK-CODE-SENTINEL"));
    CHECK(has(mem, "TASK-GUIDELINE-SENTINEL"));
    CHECK(has(mem, "API-GUIDELINE-SENTINEL"));
    CHECK(has(mem, "SNIPPET-SENTINEL"));
    CHECK(has(mem, "DOC-SENTINEL"));
    CHECK_FALSE(has(mem, "FAILED-TRAJECTORY-SENTINEL"));
    CHECK_FALSE(has(mem, "GOLD-DOC-SENTINEL"));

    const auto van = render_prompt(ctx, Mode::kVanilla, t);
    CHECK(has(van, "REQ-SENTINEL"));
    CHECK_FALSE(has(van, "DOC-SENTINEL"));
    CHECK_FALSE(has(van, "TASK-CODE-SENTINEL"));
    CHECK_FALSE(has(van, "API-GUIDELINE-SENTINEL"));

    const auto ora = render_prompt(ctx, Mode::kOracle, t);
    CHECK(has(ora, "GOLD-DOC-SENTINEL"));
    CHECK_FALSE(has(ora, "lib.add(a, b)"));
    CHECK_FALSE(has(ora, "API-GUIDELINE-SENTINEL"));
    CHECK_FALSE(has(ora, "TASK-CODE-SENTINEL"));

    const auto ntm = render_prompt(ctx, Mode::kNoTaskMem, t);
    CHECK_FALSE(has(ntm, "TASK-CODE-SENTINEL"));
    CHECK_FALSE(has(ntm, "TASK-GUIDELINE-SENTINEL"));
    CHECK(has(ntm, "API-GUIDELINE-SENTINEL"));
    CHECK(has(ntm, "SNIPPET-SENTINEL"));

    const auto nam = render_prompt(ctx, Mode::kNoApiMem, t);
    CHECK(has(nam, "TASK-CODE-SENTINEL"));
    CHECK(has(nam, "DOC-SENTINEL"));
    CHECK_FALSE(has(nam, "API-GUIDELINE-SENTINEL"));
    CHECK_FALSE(has(nam, "SNIPPET-SENTINEL"));

    const auto acc = render_prompt(ctx, Mode::kAccum, t);
    CHECK(has(acc, "TASK-CODE-SENTINEL"));
    CHECK(has(acc, "FAILED-TRAJECTORY-SENTINEL"));
    CHECK(has(acc, "ERR-SENTINEL"));
    CHECK_FALSE(has(acc, "API-GUIDELINE-SENTINEL"));

    for (auto m : all_modes()) {
      const auto p = render_prompt(ctx, m, t);
      REQUIRE(p.size() == 2);
      CHECK(p[0].role == "system");
      CHECK(p[1].role == "user");
      // Requirement always comes last.
      CHECK(p[1].content.rfind("REQ-SENTINEL") > p[1].content.rfind("## "));
    }
  }

  TEST_CASE("memcoder prompt keeps task blocks before API blocks") {
    const auto p = render_prompt(sample_context(), Mode::kMemcoder, testing::templates())[1].content;
    CHECK(p.find("### Past task 1") < p.find("### API lib.add"));
    CHECK(p.find("### API lib.add") < p.find("## Requirement"));
  }

  TEST_CASE("oracle without gold docs is a config error") {
    auto ctx = sample_context();
    ctx.gold_docs.reset();
    CHECK_THROWS_AS(render_prompt(ctx, Mode::kOracle, testing::templates()), ConfigError);
  }

  TEST_CASE("injected guidelines only for guideline modes") {
    const auto ctx = sample_context();
    CHECK(injected_guidelines(ctx, Mode::kMemcoder).size() == 1);
    CHECK(injected_guidelines(ctx, Mode::kNoTaskMem).size() == 1);
    for (auto m : {Mode::kVanilla, Mode::kOracle, Mode::kNoApiMem, Mode::kAccum}) {
      CHECK(injected_guidelines(ctx, m).empty());
    }
  }

  TEST_CASE("mode names round trip") {
    for (auto m : all_modes()) CHECK(mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(mode_from_string("turbo"), ConfigError);
  }

  TEST_CASE("fit_to_budget drops task blocks first and never guidelines") {
    auto ctx = sample_context();
    for (int i = 0; i < 20; ++i) ctx.task_blocks.push_back(ctx.task_blocks.front());
    const auto& t = testing::templates();
    const auto full = prompt_tokens(render_prompt(ctx, Mode::kMemcoder, t));
    CHECK(fit_to_budget(ctx, Mode::kMemcoder, t, 0).task_blocks.size() == 21);
    const auto fitted = fit_to_budget(ctx, Mode::kMemcoder, t, full / 2);
    CHECK(fitted.task_blocks.size() < 21);
    CHECK(prompt_tokens(render_prompt(fitted, Mode::kMemcoder, t)) <= full / 2);
    CHECK(fitted.api_blocks.front().guidelines.size() == 1);
    const auto tiny = fit_to_budget(ctx, Mode::kMemcoder, t, 1);
    CHECK(tiny.task_blocks.empty());
    CHECK(tiny.api_blocks.front().snippets.empty());
    CHECK(tiny.api_blocks.front().guidelines.size() == 1);
  }

  TEST_CASE("extract_code") {
    CHECK(extract_code("```python\nx = 1\n```") == "x = 1");
    CHECK(extract_code("text\n```python\na\n```\nmore\n```\n    b = 2\n```\n") == "    b = 2");
    CHECK(extract_code("```python\n\n  def f():\n    pass\n\n```") == "  def f():\n    pass");
    CHECK(extract_code("```python\nunterminated = True\n") == "unterminated = True");
    CHECK(extract_code("  plain = 1  \n") == "plain = 1");
    CHECK_THROWS_AS(extract_code("   \n "), ExtractionError);
  }
}
