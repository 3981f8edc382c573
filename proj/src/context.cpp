#include "memcoder/context.hpp"

namespace memcoder {

GenerationContext build_context(const std::string& requirement, const std::vector<ScoredTask>& retrieved_tasks,
                                const std::vector<std::string>& doc_apis, const MemoryStore& store,
                                const LibraryCatalog& catalog, const RetrievalConfig& config) {
  GenerationContext ctx;
  ctx.requirement = requirement;
  for (const auto& t : retrieved_tasks) {
    ctx.task_blocks.push_back(TaskBlock{t.entry->entry_id, t.similarity, t.entry->code,
                                        t.entry->feedback.summary(kFeedbackTailLines), t.entry->task_guideline});
  }

  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& name : doc_apis) {
    if (seen.insert(name).second) order.push_back(name);
  }
  std::set<std::string> extras;
  for (const auto& name : build_candidate_api_set(doc_apis, retrieved_tasks)) {
    if (!seen.count(name)) extras.insert(name);
  }
  order.insert(order.end(), extras.begin(), extras.end());

  for (const auto& name : order) {
    ApiBlock block;
    block.api_name = name;
    if (const auto* entry = store.find_api(name)) {
      block.doc = entry->doc;
      block.guidelines = select_guidelines(*entry, config.guidelines_per_api);
      block.snippets = select_successful_snippets(*entry, config.snippets_per_api);
      block.trajectories = entry->snippets;
      for (const auto& g : block.guidelines) ctx.used_guideline_ids.insert(GuidelineRef{name, g.id});
    } else {
      block.doc = catalog.doc(name);
    }
    ctx.api_blocks.push_back(std::move(block));
  }
  return ctx;
}

}  // namespace memcoder
