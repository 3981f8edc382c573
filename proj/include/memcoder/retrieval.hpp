#pragma once

#include <set>
#include <string>
#include <vector>

#include "memcoder/catalog.hpp"
#include "memcoder/embedding.hpp"
#include "memcoder/memory_store.hpp"

namespace memcoder {

// Retrieval defaults: 3 similar tasks, 5 docs, 3 guidelines and 1 snippet
// per API.
struct RetrievalConfig {
  std::size_t k_task = 3;
  std::size_t k_doc = 5;
  std::size_t guidelines_per_api = 3;
  std::size_t snippets_per_api = 1;
};

struct ScoredTask {
  const TaskMemoryEntry* entry = nullptr;
  double similarity = 0.0;
};

// Top-K_task task entries by cosine to `query`, descending; ties go to the
// smaller entry_id. Returns fewer when the store holds fewer.
std::vector<ScoredTask> retrieve_similar_tasks(const MemoryStore& store, const EmbeddingVector& query,
                                               std::size_t k_task);

// Top-K_doc api names by cosine to the doc index; ties go to the
// lexicographically smaller name. Throws ConfigError on an empty catalog.
std::vector<std::string> retrieve_docs(const LibraryCatalog& catalog, const EmbeddingVector& query,
                                       std::size_t k_doc);

// doc_apis ∪ ⋃ used_apis(retrieved).
std::set<std::string> build_candidate_api_set(const std::vector<std::string>& doc_apis,
                                              const std::vector<ScoredTask>& retrieved);

// Top-N guidelines by weight, descending; ties go to the older origin_seq,
// then the smaller id.
std::vector<Guideline> select_guidelines(const ApiMemoryEntry& entry, std::size_t n);

// Most recent successful snippets, newest first.
std::vector<SnippetRecord> select_successful_snippets(const ApiMemoryEntry& entry, std::size_t n);

}  // namespace memcoder
