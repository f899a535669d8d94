#include "weaknas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace weaknas {

double test_regret(const RunResult& result, const TabularBenchmark& bench) {
  return bench.max_accuracy(Signal::Test) - bench.query(result.best_by_val, Signal::Test);
}

std::optional<std::size_t> queries_to_optimal(const RunResult& result, const TabularBenchmark& bench,
                                              Signal signal) {
  const ArchIndex target = bench.optimum_index(signal);
  const auto it = std::find(result.query_log.begin(), result.query_log.end(), target);
  if (it == result.query_log.end()) return std::nullopt;
  return static_cast<std::size_t>(it - result.query_log.begin()) + 1;
}

std::optional<double> kendall_tau(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("kendall_tau: lists differ in length");
  if (pred.size() < 2) throw std::invalid_argument("kendall_tau: need at least two items");
  // Pairs tied in pred (a) or truth (b) are excluded from each side's count.
  long long concordant = 0;
  long long discordant = 0;
  long long untied_pred = 0;
  long long untied_truth = 0;
  const std::size_t n = pred.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dp = pred[i] - pred[j];
      const double dt = truth[i] - truth[j];
      if (dp != 0.0) ++untied_pred;
      if (dt != 0.0) ++untied_truth;
      const double s = dp * dt;
      if (s > 0.0) {
        ++concordant;
      } else if (s < 0.0) {
        ++discordant;
      }
    }
  }
  if (untied_pred == 0 || untied_truth == 0) return std::nullopt;
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(untied_pred) * static_cast<double>(untied_truth));
}

std::vector<double> edf(std::span<const double> errors, std::span<const double> grid) {
  if (errors.empty()) throw std::invalid_argument("edf: no errors");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(grid.size());
  for (double g : grid) {
    const auto le = std::upper_bound(sorted.begin(), sorted.end(), g) - sorted.begin();
    out.push_back(static_cast<double>(le) / static_cast<double>(sorted.size()));
  }
  return out;
}

std::optional<double> top_n_hit_fraction(std::span<const ArchIndex> samples, const TabularBenchmark& bench,
                                         std::size_t n_top) {
  if (samples.empty()) return std::nullopt;
  if (n_top > bench.size()) throw std::invalid_argument("top_n_hit_fraction: n_top exceeds space size");
  std::vector<ArchIndex> top = bench.top_indices(n_top, Signal::Validation);
  std::sort(top.begin(), top.end());
  std::size_t hits = 0;
  for (ArchIndex s : samples) hits += std::binary_search(top.begin(), top.end(), s) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

Stat describe(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("describe: no values");
  Stat s;
  s.count = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  // Rounding can push the mean a hair outside [min, max] for equal values.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

RunSetSummary aggregate(std::span<const RunResult> results, const TabularBenchmark& bench, Signal signal) {
  if (results.empty()) throw std::invalid_argument("aggregate: no runs");
  RunSetSummary out;
  out.runs = results.size();
  std::vector<double> acc;
  std::vector<double> regret;
  std::vector<double> q2o;
  std::vector<double> queries;
  std::size_t max_iters = 0;
  for (const RunResult& r : results) {
    acc.push_back(r.test_acc_of_best);
    regret.push_back(test_regret(r, bench));
    queries.push_back(static_cast<double>(r.total_queries));
    if (const auto q = queries_to_optimal(r, bench, signal)) {
      q2o.push_back(static_cast<double>(*q));
    } else {
      ++out.missed_optimum;
    }
    max_iters = std::max(max_iters, r.history.size());
  }
  out.test_accuracy = describe(acc);
  out.test_regret = describe(regret);
  out.total_queries = describe(queries);
  if (!q2o.empty()) out.queries_to_optimal = describe(q2o);

  for (std::size_t k = 0; k < max_iters; ++k) {
    double hit_sum = 0.0;
    std::size_t hit_n = 0;
    double tau_sum = 0.0;
    std::size_t tau_n = 0;
    for (const RunResult& r : results) {
      if (k >= r.history.size()) continue;
      const IterationRecord& rec = r.history[k];
      if (!rec.new_samples.empty()) {
        hit_sum += static_cast<double>(rec.top50_hits) / static_cast<double>(rec.new_samples.size());
        ++hit_n;
      }
      if (rec.kendall_tau_top50) {
        tau_sum += *rec.kendall_tau_top50;
        ++tau_n;
      }
    }
    out.top50_hit_fraction.push_back(hit_n ? hit_sum / static_cast<double>(hit_n) : 0.0);
    out.kendall_tau_top50.push_back(tau_n ? std::optional<double>(tau_sum / static_cast<double>(tau_n))
                                          : std::nullopt);
  }
  return out;
}

}  // namespace weaknas
