#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "memcoder/vector.hpp"

namespace memcoder::kernels {

// Row-major matrix of unit vectors, one row per indexed item.
struct DenseIndex {
  std::size_t dimension = 0;
  std::vector<double> rows;

  std::size_t size() const noexcept { return dimension ? rows.size() / dimension : 0; }
  void append(const EmbeddingVector& v);
};

// scores[i] = <query, row i>. The parallel version splits rows across
// OpenMP threads; each dot product is accumulated in the same order as the
// serial reference, so results are bit-identical.
void score_rows_serial(std::span<const double> query, const DenseIndex& index, std::span<double> scores);
void score_rows_parallel(std::span<const double> query, const DenseIndex& index, std::span<double> scores);

// Indices of the `k` best scores, descending; equal scores keep ascending
// index order. Rows are expected to be pre-sorted by the caller's
// tie-break key.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

// Below this many rows the parallel kernel falls back to the serial loop.
inline constexpr std::size_t kParallelThreshold = 2048;

std::vector<double> score_rows(std::span<const double> query, const DenseIndex& index);

}  // namespace memcoder::kernels
