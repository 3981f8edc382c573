#include "memcoder/memory_store.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "memcoder/error.hpp"

namespace memcoder {

void WeightParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(reward)) throw ConfigError("weight reward step must be > 0");
  if (!positive(penalty)) throw ConfigError("weight penalty step must be > 0");
  if (!positive(w_min)) throw ConfigError("w_min must be > 0");
  if (!std::isfinite(w_init) || w_init < w_min) throw ConfigError("w_init must be >= w_min");
}

const Guideline* ApiMemoryEntry::find_guideline(GuidelineId id) const {
  for (const auto& g : guidelines) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

bool ApiMemoryEntry::has_guideline_text(const std::string& text) const {
  return std::any_of(guidelines.begin(), guidelines.end(), [&](const Guideline& g) { return g.text == text; });
}

std::string describe(const RoutingAction& action) {
  struct Visitor {
    std::string operator()(const routing::Discard&) const { return "Discard"; }
    std::string operator()(const routing::Add& a) const { return "Add(" + a.text + ")"; }
    std::string operator()(const routing::Delete& d) const {
      return "Delete(" + std::to_string(raw(d.target)) + ", " + d.replacement + ")";
    }
  };
  return std::visit(Visitor{}, action);
}

MemoryStore::MemoryStore(std::shared_ptr<const LibraryCatalog> catalog) { bind_catalog(std::move(catalog)); }

void MemoryStore::bind_catalog(std::shared_ptr<const LibraryCatalog> catalog) {
  if (!catalog) throw ConfigError("bind_catalog: null catalog");
  for (const auto& [name, _] : api_entries_) {
    if (!catalog->contains(name)) {
      throw InvariantError("memory references api '" + name + "' absent from catalog " + catalog->library());
    }
  }
  for (const auto& entry : task_entries_) {
    for (const auto& api : entry.used_apis) {
      if (!catalog->contains(api)) {
        throw InvariantError("task entry " + std::to_string(raw(entry.entry_id)) + " uses api '" + api +
                             "' absent from catalog " + catalog->library());
      }
    }
  }
  catalog_ = std::move(catalog);
  catalog_ref_ = catalog_->ref();
}

TaskEntryId MemoryStore::insert_task_entry(TaskMemoryEntry entry) {
  if (!catalog_ && !entry.used_apis.empty()) {
    throw ConfigError("insert_task_entry: store has no catalog bound to check used_apis against");
  }
  if (catalog_) {
    for (const auto& api : entry.used_apis) {
      if (!catalog_->contains(api)) {
        throw InvariantError("insert_task_entry: used api '" + api + "' is not in the catalog");
      }
    }
  }
  if (entry.requirement_embedding.empty() ||
      std::abs(l2_norm(entry.requirement_embedding.values()) - 1.0) > kUnitNormTolerance) {
    throw InvariantError("insert_task_entry: requirement embedding is not unit-norm");
  }
  if (!task_entries_.empty() && entry.created_seq < task_entries_.back().created_seq) {
    throw InvariantError("insert_task_entry: created_seq goes backwards");
  }
  if (!task_entries_.empty() &&
      entry.requirement_embedding.dimension() != task_entries_.front().requirement_embedding.dimension()) {
    throw InvariantError("insert_task_entry: embedding dimension differs from the index");
  }
  entry.entry_id = TaskEntryId{next_task_entry_id_++};
  task_entries_.push_back(std::move(entry));
  return task_entries_.back().entry_id;
}

ApiMemoryEntry& MemoryStore::ensure_api_entry(const std::string& api_name) {
  if (auto it = api_entries_.find(api_name); it != api_entries_.end()) return it->second;
  if (!catalog_) throw ConfigError("ensure_api_entry: store has no catalog bound");
  ApiMemoryEntry entry;
  entry.api_name = api_name;
  entry.doc = catalog_->doc(api_name);
  return api_entries_.emplace(api_name, std::move(entry)).first->second;
}

ApiMemoryEntry& MemoryStore::require_api(const std::string& api_name) {
  auto it = api_entries_.find(api_name);
  if (it == api_entries_.end()) throw InvariantError("unknown api entry '" + api_name + "'");
  return it->second;
}

const ApiMemoryEntry* MemoryStore::find_api(const std::string& api_name) const {
  auto it = api_entries_.find(api_name);
  return it == api_entries_.end() ? nullptr : &it->second;
}

bool MemoryStore::contains_guideline(const GuidelineRef& ref) const {
  const auto* entry = find_api(ref.api_name);
  return entry && entry->find_guideline(ref.id);
}

Guideline MemoryStore::make_guideline(std::string text, const WeightParams& params) {
  return Guideline{GuidelineId{next_guideline_id_++}, std::move(text), params.w_init, seq_counter_};
}

RoutingEffect MemoryStore::apply_routing_action(const std::string& api_name, const RoutingAction& action,
                                                const WeightParams& params) {
  auto& entry = require_api(api_name);
  if (std::holds_alternative<routing::Discard>(action)) return RoutingEffect::kNone;

  if (const auto* add = std::get_if<routing::Add>(&action)) {
    if (add->text.empty() || entry.has_guideline_text(add->text)) return RoutingEffect::kNone;
    entry.guidelines.push_back(make_guideline(add->text, params));
    return RoutingEffect::kAdded;
  }

  const auto& del = std::get<routing::Delete>(action);
  auto it = std::find_if(entry.guidelines.begin(), entry.guidelines.end(),
                         [&](const Guideline& g) { return g.id == del.target; });
  if (it == entry.guidelines.end()) {
    throw InvariantError("Delete target guideline " + std::to_string(raw(del.target)) + " not found in '" +
                         api_name + "'");
  }
  entry.guidelines.erase(it);
  if (del.replacement.empty() || entry.has_guideline_text(del.replacement)) return RoutingEffect::kRemovedOnly;
  entry.guidelines.push_back(make_guideline(del.replacement, params));
  return RoutingEffect::kReplaced;
}

void MemoryStore::update_guideline_weights(const std::set<GuidelineRef>& used, Outcome outcome,
                                           const WeightParams& params) {
  std::vector<Guideline*> targets;
  targets.reserve(used.size());
  for (const auto& ref : used) {
    auto& entry = require_api(ref.api_name);
    auto it = std::find_if(entry.guidelines.begin(), entry.guidelines.end(),
                           [&](const Guideline& g) { return g.id == ref.id; });
    if (it == entry.guidelines.end()) {
      throw InvariantError("update_guideline_weights: unknown guideline " + std::to_string(raw(ref.id)) +
                           " in '" + ref.api_name + "'");
    }
    targets.push_back(&*it);
  }
  for (auto* g : targets) {
    if (outcome == Outcome::kSuccess) {
      g->weight = g->weight + params.reward;
    } else {
      g->weight = std::max(params.w_min, g->weight - params.penalty);
    }
  }
}

void MemoryStore::append_snippet(const std::string& api_name, SnippetRecord record, std::size_t cap) {
  if (cap == 0) throw ConfigError("snippet retention cap must be positive");
  if (record.outcome == Outcome::kFailure && (!record.error_message || record.error_message->empty())) {
    throw InvariantError("failure snippet for '" + api_name + "' has no error message");
  }
  auto& entry = require_api(api_name);
  entry.snippets.push_back(std::move(record));
  // Oldest by source_seq first; stable so records from one task keep
  // insertion order.
  std::stable_sort(entry.snippets.begin(), entry.snippets.end(),
                   [](const SnippetRecord& a, const SnippetRecord& b) { return a.source_seq < b.source_seq; });
  if (entry.snippets.size() > cap) {
    entry.snippets.erase(entry.snippets.begin(),
                         entry.snippets.begin() + static_cast<std::ptrdiff_t>(entry.snippets.size() - cap));
  }
}

std::size_t MemoryStore::guideline_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : api_entries_) n += e.guidelines.size();
  return n;
}

std::size_t MemoryStore::snippet_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : api_entries_) n += e.snippets.size();
  return n;
}

bool operator==(const MemoryStore& a, const MemoryStore& b) {
  return a.catalog_ref_ == b.catalog_ref_ && a.task_entries_ == b.task_entries_ &&
         a.api_entries_ == b.api_entries_ && a.seq_counter_ == b.seq_counter_ &&
         a.next_task_entry_id_ == b.next_task_entry_id_ && a.next_guideline_id_ == b.next_guideline_id_;
}

}  // namespace memcoder
