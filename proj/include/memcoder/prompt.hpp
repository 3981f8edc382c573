#pragma once

#include <set>
#include <string>

#include "memcoder/chat.hpp"
#include "memcoder/error.hpp"
#include "memcoder/context.hpp"
#include "memcoder/templates.hpp"

namespace memcoder {

enum class Mode { kMemcoder, kVanilla, kOracle, kNoTaskMem, kNoApiMem, kAccum };

const char* to_string(Mode mode) noexcept;
Mode mode_from_string(const std::string& text);
const std::vector<Mode>& all_modes();

// Whether the mode writes to memory during the backward phase.
bool mode_evolves(Mode mode) noexcept;
// Whether API-level guidelines are injected (and therefore credited by the weight update).
bool mode_injects_guidelines(Mode mode) noexcept;

// Pure function of (context, mode, templates). Throws ConfigError for
// oracle mode without gold docs.
MessageList render_prompt(const GenerationContext& context, Mode mode, const TemplateSet& templates);

// Guidelines that render_prompt emits for `mode`; the G_used set.
std::set<GuidelineRef> injected_guidelines(const GenerationContext& context, Mode mode);

std::size_t prompt_tokens(const MessageList& messages);

// Shrinks the context until the rendered prompt fits `max_tokens`: first
// drops task blocks from the lowest-similarity end, then snippets from the
// last API block backwards. Guidelines are never dropped. max_tokens == 0
// disables the budget.
GenerationContext fit_to_budget(GenerationContext context, Mode mode, const TemplateSet& templates,
                                std::size_t max_tokens);

class ExtractionError : public Error {
 public:
  using Error::Error;
};

// Contents of the last fenced code block, or the trimmed response when it
// has no fence. Throws ExtractionError for an empty response.
std::string extract_code(const std::string& raw_response);

}  // namespace memcoder
