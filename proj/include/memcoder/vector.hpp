#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace memcoder {

inline constexpr double kUnitNormTolerance = 1e-6;

// Fixed-dimension real vector with unit L2 norm. Construction enforces the
// norm, so every instance in the system can use dot product as cosine.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  // Scales `values` to unit length. Throws InvariantError for a zero vector.
  static EmbeddingVector normalized(std::vector<double> values);

  // Accepts values that are already unit-norm within kUnitNormTolerance.
  static EmbeddingVector from_unit(std::vector<double> values);

  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  bool empty() const noexcept { return values_.empty(); }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

double l2_norm(std::span<const double> values) noexcept;

// Standard cosine similarity in [-1, 1]; throws InvariantError on
// dimension mismatch.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

}  // namespace memcoder
