#include "memcoder/retrieval.hpp"

#include <algorithm>

#include "memcoder/error.hpp"
#include "memcoder/similarity_kernels.hpp"

namespace memcoder {

std::vector<ScoredTask> retrieve_similar_tasks(const MemoryStore& store, const EmbeddingVector& query,
                                               std::size_t k_task) {
  const auto& entries = store.task_entries();
  if (entries.empty() || k_task == 0) return {};
  // Entries are stored in entry_id order, so the kernel's index tie-break
  // is the entry_id tie-break.
  kernels::DenseIndex index;
  index.rows.reserve(entries.size() * query.dimension());
  for (const auto& e : entries) index.append(e.requirement_embedding);
  const auto scores = kernels::score_rows(query.values(), index);
  std::vector<ScoredTask> out;
  for (auto i : kernels::top_k(scores, k_task)) out.push_back({&entries[i], scores[i]});
  return out;
}

std::vector<std::string> retrieve_docs(const LibraryCatalog& catalog, const EmbeddingVector& query,
                                       std::size_t k_doc) {
  if (catalog.empty()) throw ConfigError("retrieve_docs: catalog is empty");
  if (k_doc == 0) throw ConfigError("retrieve_docs: K_doc must be >= 1");
  if (catalog.doc_embeddings().size() != catalog.size()) throw ConfigError("retrieve_docs: catalog index not built");
  // names() is lexicographic, so index order is the name tie-break.
  kernels::DenseIndex index;
  for (const auto& v : catalog.doc_embeddings()) index.append(v);
  const auto scores = kernels::score_rows(query.values(), index);
  std::vector<std::string> out;
  for (auto i : kernels::top_k(scores, k_doc)) out.push_back(catalog.names()[i]);
  return out;
}

std::set<std::string> build_candidate_api_set(const std::vector<std::string>& doc_apis,
                                              const std::vector<ScoredTask>& retrieved) {
  std::set<std::string> out(doc_apis.begin(), doc_apis.end());
  for (const auto& t : retrieved) out.insert(t.entry->used_apis.begin(), t.entry->used_apis.end());
  return out;
}

std::vector<Guideline> select_guidelines(const ApiMemoryEntry& entry, std::size_t n) {
  std::vector<Guideline> ranked = entry.guidelines;
  std::sort(ranked.begin(), ranked.end(), [](const Guideline& a, const Guideline& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.origin_seq != b.origin_seq) return a.origin_seq < b.origin_seq;
    return raw(a.id) < raw(b.id);
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

std::vector<SnippetRecord> select_successful_snippets(const ApiMemoryEntry& entry, std::size_t n) {
  std::vector<SnippetRecord> out;
  for (auto it = entry.snippets.rbegin(); it != entry.snippets.rend() && out.size() < n; ++it) {
    if (it->outcome == Outcome::kSuccess) out.push_back(*it);
  }
  return out;
}

}  // namespace memcoder
