#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "memcoder/catalog.hpp"
#include "memcoder/feedback.hpp"
#include "memcoder/vector.hpp"

namespace memcoder {

enum class TaskEntryId : std::uint64_t {};
enum class GuidelineId : std::uint64_t {};

constexpr std::uint64_t raw(TaskEntryId id) noexcept { return static_cast<std::uint64_t>(id); }
constexpr std::uint64_t raw(GuidelineId id) noexcept { return static_cast<std::uint64_t>(id); }

// Guideline weight arithmetic. Defaults are not reported in the literature
// this engine follows; all four are configurable.
struct WeightParams {
  double w_init = 1.0;
  double reward = 0.2;   // added on Success
  double penalty = 0.3;  // subtracted on Failure
  double w_min = 0.1;    // floor

  // Throws ConfigError unless reward, penalty, w_min > 0 and w_init >= w_min.
  void validate() const;
};

// One reusable usage rule for a single API.
struct Guideline {
  GuidelineId id{};
  std::string text;
  double weight = 0.0;
  std::uint64_t origin_seq = 0;

  friend bool operator==(const Guideline&, const Guideline&) = default;
};

struct SnippetRecord {
  std::string code;
  Outcome outcome = Outcome::kFailure;
  std::optional<std::string> error_message;  // required when outcome == Failure
  std::uint64_t source_seq = 0;

  friend bool operator==(const SnippetRecord&, const SnippetRecord&) = default;
};

// <a, D_a, C_a, G_a>
struct ApiMemoryEntry {
  std::string api_name;
  ApiDoc doc;
  std::vector<SnippetRecord> snippets;
  std::vector<Guideline> guidelines;

  const Guideline* find_guideline(GuidelineId id) const;
  bool has_guideline_text(const std::string& text) const;

  friend bool operator==(const ApiMemoryEntry&, const ApiMemoryEntry&) = default;
};

// <r, c, f, A_used, g_Task>, with the requirement embedding as index layer.
struct TaskMemoryEntry {
  TaskEntryId entry_id{};
  std::string requirement;
  EmbeddingVector requirement_embedding;
  std::string code;
  ExecutionFeedback feedback;
  std::set<std::string> used_apis;
  std::string task_guideline;
  std::uint64_t created_seq = 0;

  friend bool operator==(const TaskMemoryEntry&, const TaskMemoryEntry&) = default;
};

struct GuidelineRef {
  std::string api_name;
  GuidelineId id{};

  friend auto operator<=>(const GuidelineRef&, const GuidelineRef&) = default;
};

namespace routing {
struct Discard {
  friend bool operator==(const Discard&, const Discard&) = default;
};
struct Add {
  std::string text;
  friend bool operator==(const Add&, const Add&) = default;
};
// Replace semantics: the target is removed and `replacement` is added at w_init.
struct Delete {
  GuidelineId target{};
  std::string replacement;
  friend bool operator==(const Delete&, const Delete&) = default;
};
}  // namespace routing

using RoutingAction = std::variant<routing::Discard, routing::Add, routing::Delete>;

std::string describe(const RoutingAction& action);

// What apply_routing_action actually did to the entry.
enum class RoutingEffect {
  kNone,          // Discard, or Add of text already present
  kAdded,
  kReplaced,      // Delete: target removed, replacement added
  kRemovedOnly,   // Delete whose replacement duplicates another guideline
};

// Multi-dimensional evolving memory. Single writer; concurrent readers are
// safe between mutations. Value type: copy to snapshot.
class MemoryStore {
 public:
  MemoryStore() = default;
  explicit MemoryStore(std::shared_ptr<const LibraryCatalog> catalog);

  // Attaches a catalog and verifies every API reference against it.
  void bind_catalog(std::shared_ptr<const LibraryCatalog> catalog);
  const LibraryCatalog* catalog() const noexcept { return catalog_.get(); }

  // Assigns and returns the next entry id. Rejects uncataloged used_apis,
  // non-unit embeddings and out-of-order created_seq.
  TaskEntryId insert_task_entry(TaskMemoryEntry entry);

  // Creates the API entry from catalog docs on first use.
  ApiMemoryEntry& ensure_api_entry(const std::string& api_name);

  RoutingEffect apply_routing_action(const std::string& api_name, const RoutingAction& action,
                                     const WeightParams& params);

  // Reward/penalty update over every referenced guideline; all ids are checked before any
  // weight changes.
  void update_guideline_weights(const std::set<GuidelineRef>& used, Outcome outcome,
                                const WeightParams& params);

  // FIFO by source_seq: after the call |snippets| <= cap.
  void append_snippet(const std::string& api_name, SnippetRecord record, std::size_t cap);

  const std::vector<TaskMemoryEntry>& task_entries() const noexcept { return task_entries_; }
  const std::map<std::string, ApiMemoryEntry>& api_entries() const noexcept { return api_entries_; }
  const ApiMemoryEntry* find_api(const std::string& api_name) const;
  bool contains_guideline(const GuidelineRef& ref) const;

  // Position of the next task in the stream.
  std::uint64_t seq_counter() const noexcept { return seq_counter_; }
  void advance_seq() noexcept { ++seq_counter_; }

  std::uint64_t next_task_entry_id() const noexcept { return next_task_entry_id_; }
  std::uint64_t next_guideline_id() const noexcept { return next_guideline_id_; }
  const std::string& catalog_ref() const noexcept { return catalog_ref_; }

  std::size_t guideline_count() const;
  std::size_t snippet_count() const;

  // Structural equality; the bound catalog pointer is not compared.
  friend bool operator==(const MemoryStore& a, const MemoryStore& b);

 private:
  friend class SnapshotCodec;

  ApiMemoryEntry& require_api(const std::string& api_name);
  Guideline make_guideline(std::string text, const WeightParams& params);

  std::shared_ptr<const LibraryCatalog> catalog_;
  std::string catalog_ref_;
  std::vector<TaskMemoryEntry> task_entries_;
  std::map<std::string, ApiMemoryEntry> api_entries_;
  std::uint64_t seq_counter_ = 0;
  std::uint64_t next_task_entry_id_ = 1;
  std::uint64_t next_guideline_id_ = 1;
};

}  // namespace memcoder
