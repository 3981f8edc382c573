#pragma once

// Independent reference implementations used by unit tests and the
// acceptance binary: brute force, full sorts and plain loops.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memcoder/metrics.hpp"
#include "support.hpp"

namespace oracle {

// Exact fraction of k-subsets of n samples (the first c passing) that
// contain at least one passing sample, by enumerating bitmasks.
inline memcoder::Rational subset_fraction(unsigned n, unsigned c, unsigned k) {
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  const std::uint32_t pass_mask = c == 0 ? 0u : ((1u << c) - 1u);
  for (std::uint32_t m = 0; m < (1u << n); ++m) {
    if (static_cast<unsigned>(__builtin_popcount(m)) != k) continue;
    ++total;
    if (m & pass_mask) ++hits;
  }
  const auto g = std::gcd(hits, total);
  return {hits / g, total / g};
}

// Estimated probability that a uniformly drawn k-subset contains a pass.
inline double monte_carlo(unsigned n, unsigned c, unsigned k, std::size_t draws, testing::Gen& g) {
  std::vector<unsigned> idx(n);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < draws; ++d) {
    std::iota(idx.begin(), idx.end(), 0u);
    bool hit = false;
    for (unsigned i = 0; i < k; ++i) {
      const auto j = i + static_cast<unsigned>(g.below(n - i));
      std::swap(idx[i], idx[j]);
      if (idx[i] < c) hit = true;
    }
    hits += hit;
  }
  return static_cast<double>(hits) / static_cast<double>(draws);
}

// Weight recurrence: +reward on success, max(floor, w - penalty) on failure.
inline double replay_weight(double w, const std::vector<bool>& outcomes, double reward, double penalty, double floor) {
  for (bool ok : outcomes) {
    if (ok) {
      w = w + reward;
    } else {
      w = w - penalty;
      if (w < floor) w = floor;
    }
  }
  return w;
}

// Set model of one API's guideline list: (id, text, weight) in insertion order.
struct GuidelineModel {
  struct Item {
    std::uint64_t id;
    std::string text;
    double weight;
  };
  std::vector<Item> items;
  std::uint64_t next_id = 1;

  bool has_text(const std::string& t) const {
    return std::any_of(items.begin(), items.end(), [&](const Item& i) { return i.text == t; });
  }
  void add(const std::string& t, double w_init) {
    if (t.empty() || has_text(t)) return;
    items.push_back({next_id++, t, w_init});
  }
  // Returns false when the target is absent (the store must reject it).
  bool remove_and_replace(std::uint64_t target, const std::string& replacement, double w_init) {
    auto it = std::find_if(items.begin(), items.end(), [&](const Item& i) { return i.id == target; });
    if (it == items.end()) return false;
    items.erase(it);
    add(replacement, w_init);
    return true;
  }
};

struct Ranked {
  std::size_t index;
  double score;
};

// Plain dot product in index order (the same summation order any correct
// implementation of cosine on unit vectors must reproduce).
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Full sort by score descending, then index ascending; first k.
inline std::vector<std::size_t> sort_all_top_k(const std::vector<double>& scores, std::size_t k) {
  std::vector<Ranked> all;
  for (std::size_t i = 0; i < scores.size(); ++i) all.push_back({i, scores[i]});
  std::stable_sort(all.begin(), all.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < all.size() && i < k; ++i) out.push_back(all[i].index);
  return out;
}

}  // namespace oracle
