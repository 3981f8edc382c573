#include "memcoder/snapshot.hpp"

#include <sstream>

#include "memcoder/error.hpp"
#include "memcoder/text_util.hpp"

namespace memcoder {
namespace {

using nlohmann::json;

json encode_task(const TaskMemoryEntry& e) {
  json embedding = json::array();
  for (double v : e.requirement_embedding.values()) embedding.push_back(v);
  return json{
      {"entry_id", raw(e.entry_id)},
      {"requirement", e.requirement},
      {"requirement_embedding", embedding},
      {"code", e.code},
      {"feedback", to_json(e.feedback)},
      {"used_apis", e.used_apis},
      {"task_guideline", e.task_guideline},
      {"created_seq", e.created_seq},
  };
}

json encode_api(const ApiMemoryEntry& e) {
  json snippets = json::array();
  for (const auto& s : e.snippets) {
    snippets.push_back(json{
        {"code", s.code},
        {"outcome", to_string(s.outcome)},
        {"error_message", s.error_message ? json(*s.error_message) : json(nullptr)},
        {"source_seq", s.source_seq},
    });
  }
  json guidelines = json::array();
  for (const auto& g : e.guidelines) {
    guidelines.push_back(json{
        {"guideline_id", raw(g.id)},
        {"text", g.text},
        {"weight", g.weight},
        {"origin_seq", g.origin_seq},
    });
  }
  return json{{"api_name", e.api_name}, {"doc", to_json(e.doc)}, {"snippets", snippets}, {"guidelines", guidelines}};
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

std::optional<std::string> optional_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return field<std::string>(j, key, where);
}

}  // namespace

json SnapshotCodec::encode(const MemoryStore& store) {
  json tasks = json::array();
  for (const auto& e : store.task_entries_) tasks.push_back(encode_task(e));
  json apis = json::array();
  for (const auto& [_, e] : store.api_entries_) apis.push_back(encode_api(e));
  return json{
      {"schema_version", kSnapshotSchemaVersion},
      {"seq_counter", store.seq_counter_},
      {"next_task_entry_id", store.next_task_entry_id_},
      {"next_guideline_id", store.next_guideline_id_},
      {"catalog_ref", store.catalog_ref_.empty() ? json(nullptr) : json(store.catalog_ref_)},
      {"task_entries", tasks},
      {"api_entries", apis},
  };
}

MemoryStore SnapshotCodec::decode(const json& doc, const WeightParams& params) {
  if (!doc.is_object()) throw ParseError("snapshot: top level is not an object");
  const auto version = field<int>(doc, "schema_version", "snapshot");
  if (version != kSnapshotSchemaVersion) {
    throw ParseError("snapshot: unsupported schema_version " + std::to_string(version));
  }
  MemoryStore store;
  store.seq_counter_ = field<std::uint64_t>(doc, "seq_counter", "snapshot");
  store.next_task_entry_id_ = field<std::uint64_t>(doc, "next_task_entry_id", "snapshot");
  store.next_guideline_id_ = field<std::uint64_t>(doc, "next_guideline_id", "snapshot");
  store.catalog_ref_ = optional_string(doc, "catalog_ref", "snapshot").value_or("");

  const auto tasks = field<json>(doc, "task_entries", "snapshot");
  if (!tasks.is_array()) throw ParseError("snapshot.task_entries: not an array");
  std::uint64_t last_id = 0;
  std::uint64_t last_seq = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto where = "task_entries[" + std::to_string(i) + "]";
    const auto& t = tasks[i];
    TaskMemoryEntry e;
    e.entry_id = TaskEntryId{field<std::uint64_t>(t, "entry_id", where)};
    e.requirement = field<std::string>(t, "requirement", where);
    try {
      e.requirement_embedding =
          EmbeddingVector::from_unit(field<std::vector<double>>(t, "requirement_embedding", where));
    } catch (const InvariantError& err) {
      throw InvariantError(where + ".requirement_embedding: " + err.what());
    }
    e.code = field<std::string>(t, "code", where);
    e.feedback = feedback_from_json(field<json>(t, "feedback", where), where + ".feedback");
    try {
      e.feedback.validate();
    } catch (const InvariantError& err) {
      throw InvariantError(where + ".feedback: " + err.what());
    }
    e.used_apis = field<std::set<std::string>>(t, "used_apis", where);
    e.task_guideline = field<std::string>(t, "task_guideline", where);
    e.created_seq = field<std::uint64_t>(t, "created_seq", where);
    if (raw(e.entry_id) <= last_id) throw InvariantError(where + ": entry_id not strictly increasing");
    if (e.created_seq < last_seq) throw InvariantError(where + ": created_seq goes backwards");
    if (raw(e.entry_id) >= store.next_task_entry_id_) throw InvariantError(where + ": entry_id >= next_task_entry_id");
    if (e.created_seq >= store.seq_counter_) throw InvariantError(where + ": created_seq >= seq_counter");
    last_id = raw(e.entry_id);
    last_seq = e.created_seq;
    store.task_entries_.push_back(std::move(e));
  }

  const auto apis = field<json>(doc, "api_entries", "snapshot");
  if (!apis.is_array()) throw ParseError("snapshot.api_entries: not an array");
  std::set<std::uint64_t> guideline_ids;
  for (std::size_t i = 0; i < apis.size(); ++i) {
    const auto& a = apis[i];
    auto where = "api_entries[" + std::to_string(i) + "]";
    ApiMemoryEntry e;
    e.api_name = field<std::string>(a, "api_name", where);
    where += "(" + e.api_name + ")";
    e.doc = api_doc_from_json(field<json>(a, "doc", where), where + ".doc");
    const auto snippets = field<json>(a, "snippets", where);
    if (!snippets.is_array()) throw ParseError(where + ".snippets: not an array");
    for (std::size_t k = 0; k < snippets.size(); ++k) {
      const auto sw = where + ".snippets[" + std::to_string(k) + "]";
      SnippetRecord s;
      s.code = field<std::string>(snippets[k], "code", sw);
      s.outcome = outcome_from_string(field<std::string>(snippets[k], "outcome", sw));
      s.error_message = optional_string(snippets[k], "error_message", sw);
      s.source_seq = field<std::uint64_t>(snippets[k], "source_seq", sw);
      if (s.outcome == Outcome::kFailure && (!s.error_message || s.error_message->empty())) {
        throw InvariantError(sw + ": failure snippet without error_message");
      }
      if (!e.snippets.empty() && s.source_seq < e.snippets.back().source_seq) {
        throw InvariantError(sw + ": snippets not ordered by source_seq");
      }
      e.snippets.push_back(std::move(s));
    }
    const auto guidelines = field<json>(a, "guidelines", where);
    if (!guidelines.is_array()) throw ParseError(where + ".guidelines: not an array");
    for (std::size_t k = 0; k < guidelines.size(); ++k) {
      const auto gw = where + ".guidelines[" + std::to_string(k) + "]";
      Guideline g;
      g.id = GuidelineId{field<std::uint64_t>(guidelines[k], "guideline_id", gw)};
      g.text = field<std::string>(guidelines[k], "text", gw);
      g.weight = field<double>(guidelines[k], "weight", gw);
      g.origin_seq = field<std::uint64_t>(guidelines[k], "origin_seq", gw);
      if (!(g.weight >= params.w_min)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << gw << ": weight " << g.weight << " below w_min " << params.w_min;
        throw InvariantError(msg.str());
      }
      if (e.has_guideline_text(g.text)) throw InvariantError(gw + ": duplicate guideline text");
      if (!guideline_ids.insert(raw(g.id)).second) throw InvariantError(gw + ": duplicate guideline_id");
      if (raw(g.id) >= store.next_guideline_id_) throw InvariantError(gw + ": guideline_id >= next_guideline_id");
      e.guidelines.push_back(std::move(g));
    }
    const auto name = e.api_name;
    if (!store.api_entries_.emplace(name, std::move(e)).second) {
      throw InvariantError(where + ": duplicate api_name");
    }
  }
  return store;
}

std::string serialize_snapshot(const MemoryStore& store) { return SnapshotCodec::encode(store).dump(2) + "\n"; }

void save_snapshot(const MemoryStore& store, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_snapshot(store));
}

MemoryStore load_snapshot(const std::filesystem::path& path, const WeightParams& params) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("snapshot " + path.string() + ": " + e.what());
  }
  return SnapshotCodec::decode(doc, params);
}

}  // namespace memcoder
