// Serial vs OpenMP similarity scoring over a synthetic index.
//   bench_similarity [rows] [dim] [reps]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include <omp.h>

#include "memcoder/similarity_kernels.hpp"

using namespace memcoder;

namespace {

EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return EmbeddingVector::normalized(std::move(v));
}

template <typename F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t rows = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 100000;
  const std::size_t dim = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 256;
  const int reps = argc > 3 ? std::atoi(argv[3]) : 5;

  std::mt19937_64 rng(1);
  kernels::DenseIndex index;
  for (std::size_t i = 0; i < rows; ++i) index.append(random_unit(rng, dim));
  const auto q = random_unit(rng, dim);
  std::vector<double> serial(rows), parallel(rows);

  const double ts = best_ms(reps, [&] { kernels::score_rows_serial(q.values(), index, serial); });
  const double tp = best_ms(reps, [&] { kernels::score_rows_parallel(q.values(), index, parallel); });
  const bool same = serial == parallel;
  std::printf("rows=%zu dim=%zu threads=%d\n", rows, dim, omp_get_max_threads());
  std::printf("serial    %9.3f ms\n", ts);
  std::printf("parallel  %9.3f ms  speedup %.2fx\n", tp, ts / tp);
  std::printf("outputs   %s\n", same ? "identical" : "DIFFER");
  return same ? 0 : 1;
}
