#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "weaknas/benchmark.hpp"
#include "weaknas/search.hpp"

namespace weaknas {

/// Max test accuracy in the table minus the test accuracy of best_by_val.
double test_regret(const RunResult& result, const TabularBenchmark& bench);

/// 1-based position of the first query of the signal optimum.
std::optional<std::size_t> queries_to_optimal(const RunResult& result, const TabularBenchmark& bench,
                                              Signal signal = Signal::Validation);

/// Tie-corrected tau-b. None when either list has no variation.
/// Throws std::invalid_argument for unequal lengths or fewer than 2 items.
std::optional<double> kendall_tau(std::span<const double> pred, std::span<const double> truth);

/// Fraction of errors <= each grid point. Throws on empty errors.
std::vector<double> edf(std::span<const double> errors, std::span<const double> grid);

/// Share of `samples` inside the true top-n_top by validation accuracy.
std::optional<double> top_n_hit_fraction(std::span<const ArchIndex> samples, const TabularBenchmark& bench,
                                         std::size_t n_top);

struct Stat {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator, 0 for a single value
  double min = 0.0;
  double max = 0.0;
};

/// Throws std::invalid_argument on an empty list.
Stat describe(std::span<const double> values);

struct RunSetSummary {
  std::size_t runs = 0;
  Stat test_accuracy;
  Stat test_regret;
  Stat queries_to_optimal;    // over runs that hit the optimum
  std::size_t missed_optimum = 0;
  Stat total_queries;
  /// Per-iteration means over the runs that reached that iteration.
  std::vector<double> top50_hit_fraction;
  std::vector<std::optional<double>> kendall_tau_top50;
};

/// Throws std::invalid_argument on an empty list.
RunSetSummary aggregate(std::span<const RunResult> results, const TabularBenchmark& bench,
                        Signal signal = Signal::Validation);

}  // namespace weaknas
