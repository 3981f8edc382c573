#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "memcoder/catalog.hpp"
#include "memcoder/embedding.hpp"
#include "memcoder/memory_store.hpp"
#include "memcoder/templates.hpp"

namespace testing {

// Small hand-rolled generator for property tests. Uses raw mt19937_64
// output so sequences do not depend on the standard library's
// distributions.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  std::uint64_t next() { return rng(); }
  // Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  bool coin() { return next() & 1; }
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
  std::string word(std::size_t len = 6) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>('a' + below(26)));
    return s;
  }
};

// Self-deleting temporary directory.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path data_dir();
std::filesystem::path toylib_dir();
const memcoder::TemplateSet& templates();

// Catalog "lib" with APIs lib.f0 .. lib.f{n-1}.
std::shared_ptr<memcoder::LibraryCatalog> small_catalog(std::size_t n, memcoder::EmbeddingProvider* index_with = nullptr);

// Unit vector from small integer coordinates in [-2, 2]; coarse values make
// exact score ties common.
memcoder::EmbeddingVector coarse_unit(Gen& g, std::size_t dim);

memcoder::TaskMemoryEntry task_entry(const memcoder::EmbeddingVector& e, std::uint64_t seq,
                                     std::set<std::string> used_apis = {});

}  // namespace testing
