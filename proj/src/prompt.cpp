#include "memcoder/prompt.hpp"

#include <sstream>

#include "memcoder/error.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

const char* to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::kMemcoder: return "memcoder";
    case Mode::kVanilla: return "vanilla";
    case Mode::kOracle: return "oracle";
    case Mode::kNoTaskMem: return "no_task_mem";
    case Mode::kNoApiMem: return "no_api_mem";
    case Mode::kAccum: return "accum";
  }
  return "unknown";
}

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> modes = {Mode::kMemcoder,  Mode::kVanilla,  Mode::kOracle,
                                          Mode::kNoTaskMem, Mode::kNoApiMem, Mode::kAccum};
  return modes;
}

Mode mode_from_string(const std::string& text) {
  for (auto m : all_modes()) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown mode '" + text + "' (expected memcoder|vanilla|oracle|no_task_mem|no_api_mem|accum)");
}

bool mode_evolves(Mode mode) noexcept { return mode != Mode::kVanilla && mode != Mode::kOracle; }

bool mode_injects_guidelines(Mode mode) noexcept { return mode == Mode::kMemcoder || mode == Mode::kNoTaskMem; }

namespace {

std::string fenced(const std::string& code) { return "```python\n" + code + "\n```"; }

std::string render_guidelines(const std::vector<Guideline>& guidelines) {
  if (guidelines.empty()) return "(none yet)";
  std::string out;
  for (const auto& g : guidelines) {
    if (!out.empty()) out += "\n";
    out += "- " + g.text;
  }
  return out;
}

std::string render_snippets(const std::vector<SnippetRecord>& snippets) {
  if (snippets.empty()) return "(none yet)";
  std::string out;
  for (const auto& s : snippets) {
    if (!out.empty()) out += "\n";
    out += fenced(s.code);
  }
  return out;
}

std::string render_trajectories(const std::vector<SnippetRecord>& snippets) {
  if (snippets.empty()) return "(none yet)";
  std::string out;
  for (const auto& s : snippets) {
    if (!out.empty()) out += "\n";
    out += std::string("Outcome: ") + to_string(s.outcome) + "\n" + fenced(s.code);
    if (s.error_message) out += "\nError:\n" + tail_lines(*s.error_message, kFeedbackTailLines);
  }
  return out;
}

std::string render_task_blocks(const GenerationContext& ctx, const TemplateSet& t) {
  if (ctx.task_blocks.empty()) return "(no similar past tasks)";
  std::string out;
  for (std::size_t i = 0; i < ctx.task_blocks.size(); ++i) {
    const auto& b = ctx.task_blocks[i];
    if (!out.empty()) out += "\n";
    out += t.render("task_block", {{"index", std::to_string(i + 1)},
                                   {"code", fenced(b.code)},
                                   {"feedback", b.feedback_summary},
                                   {"task_guideline", b.task_guideline}});
  }
  return out;
}

enum class ApiStyle { kFull, kDocOnly, kAccum };

std::string render_api_blocks(const std::vector<ApiBlock>& blocks, ApiStyle style, const TemplateSet& t) {
  if (blocks.empty()) return "(no candidate APIs)";
  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n";
    switch (style) {
      case ApiStyle::kFull:
        out += t.render("api_block", {{"api_name", b.api_name},
                                      {"doc", b.doc.render()},
                                      {"snippets", render_snippets(b.snippets)},
                                      {"guidelines", render_guidelines(b.guidelines)}});
        break;
      case ApiStyle::kDocOnly:
        out += t.render("api_block_doc", {{"api_name", b.api_name}, {"doc", b.doc.render()}});
        break;
      case ApiStyle::kAccum:
        out += t.render("api_block_accum", {{"api_name", b.api_name},
                                            {"doc", b.doc.render()},
                                            {"trajectories", render_trajectories(b.trajectories)}});
        break;
    }
  }
  return out;
}

}  // namespace

MessageList render_prompt(const GenerationContext& ctx, Mode mode, const TemplateSet& t) {
  const std::string system = t.get("generation_system");
  if (mode == Mode::kVanilla) {
    return {{"system", system}, {"user", t.render("vanilla_user", {{"requirement", ctx.requirement}})}};
  }

  std::string task_blocks = "(no similar past tasks)";
  std::string api_blocks;
  switch (mode) {
    case Mode::kMemcoder:
      task_blocks = render_task_blocks(ctx, t);
      api_blocks = render_api_blocks(ctx.api_blocks, ApiStyle::kFull, t);
      break;
    case Mode::kNoTaskMem:
      api_blocks = render_api_blocks(ctx.api_blocks, ApiStyle::kFull, t);
      break;
    case Mode::kNoApiMem:
      task_blocks = render_task_blocks(ctx, t);
      api_blocks = render_api_blocks(ctx.api_blocks, ApiStyle::kDocOnly, t);
      break;
    case Mode::kAccum:
      task_blocks = render_task_blocks(ctx, t);
      api_blocks = render_api_blocks(ctx.api_blocks, ApiStyle::kAccum, t);
      break;
    case Mode::kOracle: {
      if (!ctx.gold_docs) throw ConfigError("oracle mode requires gold_apis on the task");
      std::vector<ApiBlock> gold;
      for (const auto& doc : *ctx.gold_docs) gold.push_back(ApiBlock{doc.name, doc, {}, {}, {}});
      api_blocks = render_api_blocks(gold, ApiStyle::kDocOnly, t);
      break;
    }
    case Mode::kVanilla:
      break;
  }
  const auto user = t.render("generation_user",
                             {{"task_blocks", task_blocks}, {"api_blocks", api_blocks}, {"requirement", ctx.requirement}});
  return {{"system", system}, {"user", user}};
}

std::set<GuidelineRef> injected_guidelines(const GenerationContext& context, Mode mode) {
  if (!mode_injects_guidelines(mode)) return {};
  return context.used_guideline_ids;
}

std::size_t prompt_tokens(const MessageList& messages) {
  std::size_t n = 0;
  for (const auto& m : messages) n += approx_tokens(m.content);
  return n;
}

GenerationContext fit_to_budget(GenerationContext ctx, Mode mode, const TemplateSet& t, std::size_t max_tokens) {
  if (max_tokens == 0) return ctx;
  auto fits = [&] { return prompt_tokens(render_prompt(ctx, mode, t)) <= max_tokens; };
  while (!fits() && !ctx.task_blocks.empty()) ctx.task_blocks.pop_back();
  for (auto it = ctx.api_blocks.rbegin(); it != ctx.api_blocks.rend(); ++it) {
    while (!fits() && !it->snippets.empty()) it->snippets.pop_back();
    while (!fits() && !it->trajectories.empty()) it->trajectories.erase(it->trajectories.begin());
  }
  return ctx;
}

std::string extract_code(const std::string& raw_response) {
  const auto trimmed = trim(raw_response);
  if (trimmed.empty()) throw ExtractionError("empty LLM response");
  const auto lines = split_lines(raw_response);
  std::optional<std::string> last_block;
  bool inside = false;
  std::vector<std::string> current;
  for (const auto& line : lines) {
    const auto t = trim(line);
    if (t.rfind("```", 0) == 0) {
      if (inside) {
        last_block = join(current, "\n");
        current.clear();
        inside = false;
      } else {
        inside = true;
      }
      continue;
    }
    if (inside) current.push_back(line);
  }
  if (inside && !current.empty()) last_block = join(current, "\n");  // unterminated final fence
  if (!last_block) return trimmed;
  // Drop surrounding blank lines but keep the first line's indentation.
  auto code = *last_block;
  const auto first = code.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ExtractionError("last fenced block is empty");
  const auto line_start = code.rfind('\n', first);
  code.erase(0, line_start == std::string::npos ? 0 : line_start + 1);
  code.erase(code.find_last_not_of(" \t\r\n") + 1);
  return code;
}

}  // namespace memcoder
