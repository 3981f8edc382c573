#include "memcoder/vector.hpp"

#include <cmath>
#include <sstream>

#include "memcoder/error.hpp"

namespace memcoder {

double l2_norm(std::span<const double> values) noexcept {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
  const double norm = l2_norm(values);
  if (values.empty() || !(norm > 0.0) || !std::isfinite(norm)) {
    throw InvariantError("cannot normalize a zero or non-finite vector");
  }
  for (double& v : values) v /= norm;
  return EmbeddingVector(std::move(values));
}

EmbeddingVector EmbeddingVector::from_unit(std::vector<double> values) {
  const double norm = l2_norm(values);
  if (values.empty() || std::abs(norm - 1.0) > kUnitNormTolerance) {
    std::ostringstream msg;
    msg << "embedding is not unit-norm (|v| = " << norm << ", dimension " << values.size() << ")";
    throw InvariantError(msg.str());
  }
  return EmbeddingVector(std::move(values));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw InvariantError("cosine_similarity: dimension mismatch (" + std::to_string(a.dimension()) +
                         " vs " + std::to_string(b.dimension()) + ")");
  }
  const auto x = a.values();
  const auto y = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
  // Both operands are unit-norm by construction; clamp rounding overshoot.
  if (dot > 1.0) dot = 1.0;
  if (dot < -1.0) dot = -1.0;
  return dot;
}

}  // namespace memcoder
