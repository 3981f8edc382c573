#include "memcoder/similarity_kernels.hpp"

#include <algorithm>
#include <numeric>

#include <omp.h>

#include "memcoder/error.hpp"

namespace memcoder::kernels {

void DenseIndex::append(const EmbeddingVector& v) {
  if (dimension == 0) dimension = v.dimension();
  if (v.dimension() != dimension) throw InvariantError("DenseIndex: dimension mismatch");
  rows.insert(rows.end(), v.values().begin(), v.values().end());
}

namespace {

void check_shapes(std::span<const double> query, const DenseIndex& index, std::span<double> scores) {
  if (index.size() && query.size() != index.dimension) throw InvariantError("score_rows: query dimension mismatch");
  if (scores.size() != index.size()) throw InvariantError("score_rows: output size mismatch");
}

inline double dot_row(const double* row, const double* q, std::size_t dim) {
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) acc += row[d] * q[d];
  return acc;
}

}  // namespace

void score_rows_serial(std::span<const double> query, const DenseIndex& index, std::span<double> scores) {
  check_shapes(query, index, scores);
  const std::size_t n = index.size();
  const std::size_t dim = index.dimension;
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = dot_row(index.rows.data() + i * dim, query.data(), dim);
  }
}

void score_rows_parallel(std::span<const double> query, const DenseIndex& index, std::span<double> scores) {
  check_shapes(query, index, scores);
  const auto n = static_cast<std::ptrdiff_t>(index.size());
  const std::size_t dim = index.dimension;
  const double* rows = index.rows.data();
  const double* q = query.data();
  double* out = scores.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = dot_row(rows + static_cast<std::size_t>(i) * dim, q, dim);
  }
}

std::vector<double> score_rows(std::span<const double> query, const DenseIndex& index) {
  std::vector<double> scores(index.size());
  if (index.size() >= kParallelThreshold) {
    score_rows_parallel(query, index, scores);
  } else {
    score_rows_serial(query, index, scores);
  }
  return scores;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);
  order.resize(k);
  return order;
}

}  // namespace memcoder::kernels
