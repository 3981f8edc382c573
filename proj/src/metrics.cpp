#include "memcoder/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "memcoder/error.hpp"
#include "memcoder/evolution.hpp"

namespace memcoder {

Rational estimator_exact(std::uint64_t n, std::uint64_t c, std::uint64_t k) {
  if (c > n) throw ConfigError("estimator: c=" + std::to_string(c) + " exceeds n=" + std::to_string(n));
  if (k < 1 || k > n) {
    throw ConfigError("estimator: k=" + std::to_string(k) + " outside [1, n=" + std::to_string(n) + "]");
  }
  if (n - c < k) return Rational{1, 1};
  // q = C(n-c,k)/C(n,k) accumulated as num/den.
  unsigned __int128 num = 1;
  unsigned __int128 den = 1;
  constexpr unsigned __int128 kLimit = ~std::uint64_t{0};
  for (std::uint64_t i = 0; i < k; ++i) {
    std::uint64_t a = n - c - i;
    std::uint64_t b = n - i;
    const auto g = std::gcd(a, b);
    a /= g;
    b /= g;
    // Cross-cancel so num/den stays reduced.
    const auto g1 = std::gcd(a, static_cast<std::uint64_t>(den));
    a /= g1;
    den /= g1;
    const auto g2 = std::gcd(b, static_cast<std::uint64_t>(num));
    b /= g2;
    num /= g2;
    num *= a;
    den *= b;
    if (num > kLimit || den > kLimit) throw InvariantError("estimator: fraction overflows 64 bits");
  }
  const auto nu = static_cast<std::uint64_t>(num);
  const auto de = static_cast<std::uint64_t>(den);
  const auto g = std::gcd(de - nu, de);
  return Rational{(de - nu) / g, de / g};
}

double estimator(std::uint64_t n, std::uint64_t c, std::uint64_t k) { return estimator_exact(n, c, k).value(); }

MetricReport aggregate(const std::vector<InstanceCounts>& rows, const std::vector<std::size_t>& ks) {
  if (rows.empty()) throw ConfigError("aggregate: no results");
  if (ks.empty()) throw ConfigError("aggregate: no k values");
  MetricReport report;
  report.n_samples = rows.front().n_samples;
  report.instances = rows.size();
  report.rows = rows;
  for (const auto& r : rows) {
    if (r.n_samples != report.n_samples) {
      throw ConfigError("aggregate: mixed n_samples (" + std::to_string(report.n_samples) + " and " +
                        std::to_string(r.n_samples) + " for " + r.task_id + ")");
    }
    if (!(r.c_pass <= r.c_exec && r.c_exec <= r.n_samples)) {
      throw InvariantError("aggregate: " + r.task_id + " violates c_pass <= c_exec <= n_samples");
    }
  }
  for (auto k : ks) {
    if (k == 0 || k > report.n_samples) {
      throw ConfigError("aggregate: k=" + std::to_string(k) + " is outside [1, n_samples=" +
                        std::to_string(report.n_samples) + "]");
    }
    MetricAtK m;
    for (const auto& r : rows) {
      m.pass_at_k += estimator(r.n_samples, r.c_pass, k);
      m.exec_at_k += estimator(r.n_samples, r.c_exec, k);
    }
    m.pass_at_k /= static_cast<double>(rows.size());
    m.exec_at_k /= static_cast<double>(rows.size());
    report.by_k[k] = m;
  }
  return report;
}

MetricReport aggregate(const std::vector<TaskResult>& results, const std::vector<std::size_t>& ks) {
  std::vector<InstanceCounts> rows;
  rows.reserve(results.size());
  for (const auto& r : results) rows.push_back({r.task_id, r.n_samples, r.c_pass, r.c_exec});
  return aggregate(rows, ks);
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
  return buf;
}

std::string format_table(const MetricReport& report) {
  std::vector<std::string> headers;
  std::vector<std::string> cells;
  for (const auto& [k, m] : report.by_k) {
    headers.push_back("Pass@" + std::to_string(k));
    cells.push_back(format_percent(m.pass_at_k));
  }
  for (const auto& [k, m] : report.by_k) {
    headers.push_back("Exec@" + std::to_string(k));
    cells.push_back(format_percent(m.exec_at_k));
  }
  std::ostringstream out;
  auto row = [&](const std::vector<std::string>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto width = std::max(headers[i].size(), cells[i].size());
      if (i) out << "  ";
      out << std::string(width - values[i].size(), ' ') << values[i];
    }
    out << "\n";
  };
  row(headers);
  row(cells);
  out << "(" << report.instances << " instances, n=" << report.n_samples << ")\n";
  return out.str();
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, m] : report.by_k) {
    metrics[std::to_string(k)] = {{"pass_at_k", m.pass_at_k}, {"exec_at_k", m.exec_at_k},
                                  {"pass_at_k_pct", format_percent(m.pass_at_k)},
                                  {"exec_at_k_pct", format_percent(m.exec_at_k)}};
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"task_id", r.task_id}, {"c_pass", r.c_pass}, {"c_exec", r.c_exec}});
  }
  return {{"n_samples", report.n_samples}, {"instances", report.instances}, {"metrics", metrics}, {"rows", rows}};
}

std::string format_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "task_id,n_samples,c_pass,c_exec";
  for (const auto& [k, _] : report.by_k) out << ",pass@" << k;
  for (const auto& [k, _] : report.by_k) out << ",exec@" << k;
  out << "\n";
  for (const auto& r : report.rows) {
    out << r.task_id << "," << r.n_samples << "," << r.c_pass << "," << r.c_exec;
    for (const auto& [k, _] : report.by_k) out << "," << format_percent(estimator(r.n_samples, r.c_pass, k));
    for (const auto& [k, _] : report.by_k) out << "," << format_percent(estimator(r.n_samples, r.c_exec, k));
    out << "\n";
  }
  return out.str();
}

}  // namespace memcoder
