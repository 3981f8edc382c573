#include "memcoder/catalog.hpp"

#include "memcoder/embedding.hpp"
#include "memcoder/error.hpp"
#include "memcoder/hash.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {

std::string ApiDoc::render() const {
  std::string out = signature.empty() ? name : signature;
  if (!description.empty()) out += "\n" + description;
  if (source && !source->empty()) out += "\nSource:\n" + *source;
  return out;
}

std::string ApiDoc::index_text() const { return name + "\n" + signature + "\n" + description; }

nlohmann::json to_json(const ApiDoc& doc) {
  nlohmann::json j{{"name", doc.name}, {"signature", doc.signature}, {"description", doc.description}};
  j["source"] = doc.source ? nlohmann::json(*doc.source) : nlohmann::json(nullptr);
  return j;
}

ApiDoc api_doc_from_json(const nlohmann::json& j, const std::string& where) {
  try {
    ApiDoc doc;
    doc.name = j.at("name").get<std::string>();
    doc.signature = j.value("signature", std::string{});
    doc.description = j.value("description", std::string{});
    if (j.contains("source") && !j.at("source").is_null()) doc.source = j.at("source").get<std::string>();
    if (doc.name.empty()) throw ParseError(where + ": empty api name");
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

LibraryCatalog::LibraryCatalog(std::string library, std::vector<ApiDoc> docs) : library_(std::move(library)) {
  for (auto& doc : docs) {
    auto name = doc.name;
    if (!docs_.emplace(name, std::move(doc)).second) {
      throw ParseError("catalog: duplicate api '" + name + "'");
    }
  }
  for (const auto& [name, _] : docs_) names_.push_back(name);
}

LibraryCatalog LibraryCatalog::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("catalog " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

LibraryCatalog LibraryCatalog::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("apis") || !j.at("apis").is_array()) {
    throw ParseError("catalog: expected an object with an 'apis' array");
  }
  std::vector<ApiDoc> docs;
  const auto& apis = j.at("apis");
  for (std::size_t i = 0; i < apis.size(); ++i) {
    docs.push_back(api_doc_from_json(apis[i], "catalog.apis[" + std::to_string(i) + "]"));
  }
  return LibraryCatalog(j.value("library", std::string{"library"}), std::move(docs));
}

nlohmann::json LibraryCatalog::to_json() const {
  nlohmann::json apis = nlohmann::json::array();
  for (const auto& [_, doc] : docs_) apis.push_back(memcoder::to_json(doc));
  return {{"library", library_}, {"apis", apis}};
}

void LibraryCatalog::build_index(EmbeddingProvider& provider) {
  doc_embeddings_.clear();
  doc_embeddings_.reserve(names_.size());
  for (const auto& name : names_) {
    doc_embeddings_.push_back(provider.embed(docs_.at(name).index_text()));
  }
}

std::string LibraryCatalog::ref() const { return library_ + "@" + content_hash(to_json().dump()); }

const ApiDoc& LibraryCatalog::doc(const std::string& name) const {
  auto it = docs_.find(name);
  if (it == docs_.end()) throw InvariantError("api '" + name + "' is not in the catalog");
  return it->second;
}

const EmbeddingVector& LibraryCatalog::doc_embedding(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) {
      if (i >= doc_embeddings_.size()) throw InvariantError("catalog index not built");
      return doc_embeddings_[i];
    }
  }
  throw InvariantError("api '" + name + "' is not in the catalog");
}

}  // namespace memcoder
