#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace memcoder {

struct TaskResult;

// Non-negative fraction in lowest terms.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

// 1 - C(n-c, k) / C(n, k) as an exact fraction, via the product
// prod_{i<k} (n-c-i)/(n-i) with gcd reduction at every step.
// Throws ConfigError unless 0 <= c <= n and 1 <= k <= n; throws
// InvariantError if the reduced fraction does not fit in 64 bits.
Rational estimator_exact(std::uint64_t n, std::uint64_t c, std::uint64_t k);
double estimator(std::uint64_t n, std::uint64_t c, std::uint64_t k);

struct InstanceCounts {
  std::string task_id;
  std::size_t n_samples = 0;
  std::size_t c_pass = 0;
  std::size_t c_exec = 0;
};

struct MetricAtK {
  double pass_at_k = 0.0;
  double exec_at_k = 0.0;
};

struct MetricReport {
  std::map<std::size_t, MetricAtK> by_k;
  std::size_t n_samples = 0;
  std::size_t instances = 0;
  std::vector<InstanceCounts> rows;
};

// Mean over instances. Throws ConfigError for mixed n, k > n, k == 0 or an
// empty result set.
MetricReport aggregate(const std::vector<InstanceCounts>& rows, const std::vector<std::size_t>& ks);
MetricReport aggregate(const std::vector<TaskResult>& results, const std::vector<std::size_t>& ks);

// Percentage with two decimals, e.g. 0.5 -> "50.00".
std::string format_percent(double value);
// Aligned columns: Pass@k for every k, then Exec@k for every k.
std::string format_table(const MetricReport& report);
nlohmann::json to_json(const MetricReport& report);
// Per-instance rows: task_id,n_samples,c_pass,c_exec,pass@k...,exec@k...
std::string format_csv(const MetricReport& report);

}  // namespace memcoder
