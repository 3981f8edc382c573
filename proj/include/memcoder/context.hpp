#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "memcoder/catalog.hpp"
#include "memcoder/memory_store.hpp"
#include "memcoder/retrieval.hpp"

namespace memcoder {

// {m.c, m.f, m.g_Task} of one retrieved task.
struct TaskBlock {
  TaskEntryId entry_id{};
  double similarity = 0.0;
  std::string code;
  std::string feedback_summary;
  std::string task_guideline;
};

// m_API for one candidate API.
struct ApiBlock {
  std::string api_name;
  ApiDoc doc;
  std::vector<SnippetRecord> snippets;      // selected successful snippets
  std::vector<Guideline> guidelines;        // selected top-N by weight
  std::vector<SnippetRecord> trajectories;  // every retained snippet, oldest first
};

// Concatenation order is fixed: task blocks, API blocks, requirement.
struct GenerationContext {
  std::vector<TaskBlock> task_blocks;
  std::vector<ApiBlock> api_blocks;
  std::string requirement;
  std::set<GuidelineRef> used_guideline_ids;
  std::optional<std::vector<ApiDoc>> gold_docs;  // oracle mode only
};

inline constexpr std::size_t kFeedbackTailLines = 10;

// API block order: doc-retrieved names in rank order, then task-derived
// extras lexicographically. APIs without a memory entry get a doc-only block.
GenerationContext build_context(const std::string& requirement, const std::vector<ScoredTask>& retrieved_tasks,
                                const std::vector<std::string>& doc_apis, const MemoryStore& store,
                                const LibraryCatalog& catalog, const RetrievalConfig& config);

}  // namespace memcoder
