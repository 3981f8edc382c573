#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "memcoder/memory_store.hpp"

namespace memcoder {

inline constexpr int kSnapshotSchemaVersion = 1;

// Self-describing JSON document:
//   {schema_version, seq_counter, next_task_entry_id, next_guideline_id,
//    catalog_ref, task_entries: [...], api_entries: [...]}
// List order is significant and preserved. Weights use round-trip precision.
class SnapshotCodec {
 public:
  static nlohmann::json encode(const MemoryStore& store);
  // Throws ParseError for structural problems and InvariantError for
  // semantic ones (e.g. a weight below `params.w_min`), naming the record.
  static MemoryStore decode(const nlohmann::json& doc, const WeightParams& params = {});
};

std::string serialize_snapshot(const MemoryStore& store);
void save_snapshot(const MemoryStore& store, const std::filesystem::path& path);
MemoryStore load_snapshot(const std::filesystem::path& path, const WeightParams& params = {});

}  // namespace memcoder
