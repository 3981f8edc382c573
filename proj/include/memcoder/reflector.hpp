#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "memcoder/catalog.hpp"
#include "memcoder/feedback.hpp"
#include "memcoder/llm.hpp"
#include "memcoder/memory_store.hpp"
#include "memcoder/templates.hpp"

namespace memcoder {

// Catalog APIs referenced in `code`. Lexical: scans dotted identifier
// chains outside comments and string literals, resolves Python import
// aliases, and keeps the longest chain prefix present in the catalog.
std::set<std::string> extract_invoked_apis(const std::string& code, const LibraryCatalog& catalog);

// Mechanical task guideline used when the reflection call fails.
std::string fallback_task_guideline(const std::set<std::string>& invoked_apis, const ExecutionFeedback& feedback);

// Parses the single-line decision "DISCARD" | "ADD" | "DELETE <index>".
// Anything unparseable is Discard; an out-of-range index is Add.
RoutingAction parse_routing_decision(const std::string& response, const std::vector<Guideline>& existing,
                                     const std::string& candidate);

struct ReflectionOutcome {
  std::string task_guideline;
  std::set<std::string> invoked_apis;
  std::map<std::string, std::string> api_candidates;
  std::map<std::string, RoutingAction> actions;
};

struct ReflectorConfig {
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 1024;
  std::string model;
};

// Backward-phase LLM calls. Every call uses sample index 0; requests differ
// by content.
class Reflector {
 public:
  Reflector(LlmBackend& llm, const TemplateSet& templates, ReflectorConfig config = {});

  // Never empty: falls back to fallback_task_guideline on any LLM failure
  // or empty reply.
  std::string reflect_task(const std::string& requirement, const std::string& code, const ExecutionFeedback& feedback,
                           const std::set<std::string>& invoked_apis);

  // Candidate guideline for one invoked API; nullopt for an empty reply or
  // an LLM failure.
  std::optional<std::string> reflect_api(const std::string& api_name, const ApiDoc& doc, const std::string& code,
                                         const ExecutionFeedback& feedback);

  // One LLM decision against the listed guidelines; failures yield Discard.
  RoutingAction route_guideline(const std::string& candidate, const ApiDoc& doc,
                                const std::vector<Guideline>& existing);

  // Rendered prompts, exposed for tests.
  MessageList task_prompt(const std::string& requirement, const std::string& code, const ExecutionFeedback& feedback,
                          const std::set<std::string>& invoked_apis) const;
  MessageList api_prompt(const std::string& api_name, const ApiDoc& doc, const std::string& code,
                         const ExecutionFeedback& feedback) const;
  MessageList route_prompt(const std::string& candidate, const ApiDoc& doc,
                           const std::vector<Guideline>& existing) const;

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t failures() const noexcept { return failures_.load(); }

 private:
  std::optional<std::string> ask(MessageList messages);

  LlmBackend& llm_;
  const TemplateSet& templates_;
  ReflectorConfig config_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> failures_{0};
};

}  // namespace memcoder
