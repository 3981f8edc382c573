#include "support.hpp"

#include <atomic>

#include <unistd.h>

#include "memcoder/feedback.hpp"

namespace testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("memcoder-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path data_dir() { return fs::path(MEMCODER_DATA_DIR) / "data"; }
fs::path toylib_dir() { return data_dir() / "toylib"; }

const memcoder::TemplateSet& templates() {
  static const auto set = memcoder::TemplateSet::load(memcoder::TemplateSet::default_dir());
  return set;
}

std::shared_ptr<memcoder::LibraryCatalog> small_catalog(std::size_t n, memcoder::EmbeddingProvider* index_with) {
  std::vector<memcoder::ApiDoc> docs;
  for (std::size_t i = 0; i < n; ++i) {
    const auto name = "lib.f" + std::to_string(i);
    docs.push_back({name, name + "(x)", "Function number " + std::to_string(i) + " of lib.", std::nullopt});
  }
  auto c = std::make_shared<memcoder::LibraryCatalog>("lib", docs);
  if (index_with) c->build_index(*index_with);
  return c;
}

memcoder::EmbeddingVector coarse_unit(Gen& g, std::size_t dim) {
  while (true) {
    std::vector<double> v(dim);
    bool nonzero = false;
    for (auto& x : v) {
      x = static_cast<double>(g.between(-2, 2));
      nonzero = nonzero || x != 0.0;
    }
    if (nonzero) return memcoder::EmbeddingVector::normalized(std::move(v));
  }
}

memcoder::TaskMemoryEntry task_entry(const memcoder::EmbeddingVector& e, std::uint64_t seq,
                                     std::set<std::string> used_apis) {
  memcoder::TaskMemoryEntry t;
  t.requirement = "requirement " + std::to_string(seq);
  t.requirement_embedding = e;
  t.code = "pass";
  t.feedback = memcoder::ExecutionFeedback::classify(true, 1, 1, std::nullopt, 1, false);
  t.used_apis = std::move(used_apis);
  t.task_guideline = "lesson";
  t.created_seq = seq;
  return t;
}

}  // namespace testing
