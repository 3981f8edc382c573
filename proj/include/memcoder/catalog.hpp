#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memcoder/vector.hpp"

namespace memcoder {

class EmbeddingProvider;

// Static documentation record for one API.
struct ApiDoc {
  std::string name;
  std::string signature;
  std::string description;
  std::optional<std::string> source;

  // Text used both for embedding and for prompt injection.
  std::string render() const;
  // Text embedded into the documentation index.
  std::string index_text() const;

  friend bool operator==(const ApiDoc&, const ApiDoc&) = default;
};

nlohmann::json to_json(const ApiDoc& doc);
ApiDoc api_doc_from_json(const nlohmann::json& j, const std::string& where);

// The target library's documentation set plus its embedding index.
class LibraryCatalog {
 public:
  LibraryCatalog() = default;
  LibraryCatalog(std::string library, std::vector<ApiDoc> docs);

  // Catalog file: {"library": "...", "apis": [{name, signature, description, source?}]}
  static LibraryCatalog load(const std::filesystem::path& path);
  static LibraryCatalog from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Embeds every doc text. Must be called before doc retrieval.
  void build_index(EmbeddingProvider& provider);
  bool indexed() const noexcept { return !doc_embeddings_.empty() || docs_.empty(); }

  const std::string& library() const noexcept { return library_; }
  // "<library>@<content hash>"; recorded in snapshots.
  std::string ref() const;

  bool contains(const std::string& name) const { return docs_.count(name) != 0; }
  const ApiDoc& doc(const std::string& name) const;
  const std::map<std::string, ApiDoc>& apis() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

  // Names in lexicographic order; parallel to doc_embeddings().
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<EmbeddingVector>& doc_embeddings() const noexcept { return doc_embeddings_; }
  const EmbeddingVector& doc_embedding(const std::string& name) const;

 private:
  std::string library_;
  std::map<std::string, ApiDoc> docs_;
  std::vector<std::string> names_;
  std::vector<EmbeddingVector> doc_embeddings_;
};

}  // namespace memcoder
