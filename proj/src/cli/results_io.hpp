#pragma once
// Results files written by `search` and read by `report`.
//
// CSV (wide): one row per run plus one aggregate row per method. Fixed
// columns first, then iter{k}_* columns up to the longest run. Empty cells
// mean "not applicable".
// JSON (nested): {"schema", ["generated_at"], "benchmark", "config",
// "runs": [...], "aggregates": [...]} with the full query log and
// per-iteration history of every run.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "weaknas/metrics.hpp"
#include "weaknas/search.hpp"

namespace weaknas::cli {

struct MethodResults {
  std::string method;     // weaknas | random | evolution
  std::string strategy;   // weak NAS only
  std::string predictor;  // weak NAS only
  std::vector<RunResult> runs;
  std::vector<double> regrets;
  std::vector<std::optional<std::size_t>> queries_to_optimal;
  RunSetSummary summary;
};

struct ResultsMeta {
  std::string benchmark;
  std::string generated_at;  // empty: omitted
  std::vector<std::pair<std::string, std::string>> config;
};

std::string format_csv(const std::vector<MethodResults>& methods, const ResultsMeta& meta);
std::string format_json(const std::vector<MethodResults>& methods, const ResultsMeta& meta);

struct SummaryRow {
  std::string method;
  std::size_t runs = 0;
  Stat test_accuracy;
  Stat test_regret;
  std::optional<Stat> queries_to_optimal;
  std::size_t missed_optimum = 0;
};

struct RunTrace {
  std::string method;
  std::vector<double> query_values;
  std::vector<double> top50_fraction;  // per iteration
  std::vector<std::optional<double>> kendall_tau;
  std::vector<std::vector<double>> top200_errors;
};

struct ResultsFile {
  std::string path;
  std::vector<SummaryRow> summaries;
  std::vector<RunTrace> runs;  // JSON only
  bool has_traces = false;
};

/// Format is picked from the first non-space character. Throws
/// std::runtime_error on a missing or unknown schema.
ResultsFile read_results(const std::filesystem::path& path);

}  // namespace weaknas::cli
