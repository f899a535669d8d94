#include "results_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "weaknas/cli.hpp"

namespace weaknas::cli {

using nlohmann::ordered_json;

namespace {

const std::vector<std::string> kFixedColumns = {
    "schema",        "generated_at",    "row",          "method",         "strategy",
    "predictor",     "seed",            "runs",         "total_queries",  "best_by_val",
    "best_val_acc",  "test_acc",        "test_acc_sd",  "test_regret",    "test_regret_sd",
    "queries_to_optimal", "queries_to_optimal_sd", "missed_optimum"};

const std::vector<std::string> kIterColumns = {"new_samples", "top50_hits", "top50_fraction", "kendall_tau",
                                               "prediction_hash"};

std::string num(double v) { return fmt::format("{}", v); }
std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  line += '\n';
  return line;
}

std::size_t max_iterations(const std::vector<MethodResults>& methods) {
  std::size_t k = 0;
  for (const MethodResults& m : methods) {
    for (const RunResult& r : m.runs) k = std::max(k, r.history.size());
  }
  return k;
}

ordered_json stat_json(const Stat& s) {
  return ordered_json{{"count", s.count}, {"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}};
}

Stat stat_from_json(const ordered_json& j) {
  Stat s;
  s.count = j.value("count", std::size_t{0});
  s.mean = j.at("mean").get<double>();
  s.sd = j.at("sd").get<double>();
  s.min = j.value("min", s.mean);
  s.max = j.value("max", s.mean);
  return s;
}

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void check_schema(const std::string& schema, const std::string& path) {
  if (schema != kResultsSchema) {
    throw std::runtime_error(path + ": unsupported results schema '" + schema + "' (expected " + kResultsSchema +
                             ")");
  }
}

ResultsFile read_csv(const std::string& text, const std::string& path) {
  ResultsFile out;
  out.path = path;
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + ": empty results file");
  const std::vector<std::string> header = split_csv(line);
  const auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  if (header.empty() || header[0] != "schema") throw std::runtime_error(path + ": missing schema column");
  const std::size_t c_row = column("row");
  const std::size_t c_method = column("method");
  const std::size_t c_runs = column("runs");
  const std::size_t c_acc = column("test_acc");
  const std::size_t c_acc_sd = column("test_acc_sd");
  const std::size_t c_reg = column("test_regret");
  const std::size_t c_reg_sd = column("test_regret_sd");
  const std::size_t c_q = column("queries_to_optimal");
  const std::size_t c_q_sd = column("queries_to_optimal_sd");
  const std::size_t c_miss = column("missed_optimum");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size()) throw std::runtime_error(path + ": ragged CSV row");
    check_schema(cells[0], path);
    if (cells[c_row] != "aggregate") continue;
    SummaryRow row;
    row.method = cells[c_method];
    row.runs = std::stoul(cells[c_runs]);
    row.test_accuracy.mean = std::stod(cells[c_acc]);
    row.test_accuracy.sd = std::stod(cells[c_acc_sd]);
    row.test_regret.mean = std::stod(cells[c_reg]);
    row.test_regret.sd = std::stod(cells[c_reg_sd]);
    row.missed_optimum = std::stoul(cells[c_miss]);
    if (!cells[c_q].empty()) {
      Stat q;
      q.count = row.runs - row.missed_optimum;
      q.mean = std::stod(cells[c_q]);
      q.sd = std::stod(cells[c_q_sd]);
      row.queries_to_optimal = q;
    }
    out.summaries.push_back(row);
  }
  return out;
}

ResultsFile read_json(const std::string& text, const std::string& path) {
  ResultsFile out;
  out.path = path;
  out.has_traces = true;
  const ordered_json j = ordered_json::parse(text);
  check_schema(j.value("schema", std::string{}), path);
  for (const ordered_json& a : j.at("aggregates")) {
    SummaryRow row;
    row.method = a.at("method").get<std::string>();
    row.runs = a.at("runs").get<std::size_t>();
    row.test_accuracy = stat_from_json(a.at("test_acc"));
    row.test_regret = stat_from_json(a.at("test_regret"));
    if (!a.at("queries_to_optimal").is_null()) row.queries_to_optimal = stat_from_json(a.at("queries_to_optimal"));
    row.missed_optimum = a.at("missed_optimum").get<std::size_t>();
    out.summaries.push_back(row);
  }
  for (const ordered_json& r : j.at("runs")) {
    RunTrace t;
    t.method = r.at("method").get<std::string>();
    t.query_values = r.at("query_val").get<std::vector<double>>();
    for (const ordered_json& h : r.at("history")) {
      const auto n = h.at("new_samples").size();
      const auto hits = h.at("top50_hits").get<double>();
      t.top50_fraction.push_back(n ? hits / static_cast<double>(n) : 0.0);
      const ordered_json& tau = h.at("kendall_tau_top50");
      t.kendall_tau.push_back(tau.is_null() ? std::nullopt : std::optional<double>(tau.get<double>()));
      t.top200_errors.push_back(h.value("top200_errors", std::vector<double>{}));
    }
    out.runs.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::string format_csv(const std::vector<MethodResults>& methods, const ResultsMeta& meta) {
  const std::size_t iters = max_iterations(methods);
  std::vector<std::string> header = kFixedColumns;
  for (std::size_t k = 1; k <= iters; ++k) {
    for (const std::string& c : kIterColumns) header.push_back(fmt::format("iter{}_{}", k, c));
  }
  std::string out = join(header);

  for (const MethodResults& m : methods) {
    for (std::size_t i = 0; i < m.runs.size(); ++i) {
      const RunResult& r = m.runs[i];
      std::vector<std::string> cells = {kResultsSchema,
                                        meta.generated_at,
                                        "run",
                                        m.method,
                                        m.strategy,
                                        m.predictor,
                                        std::to_string(r.seed),
                                        "1",
                                        std::to_string(r.total_queries),
                                        std::to_string(r.best_by_val),
                                        num(r.best_val_acc),
                                        num(r.test_acc_of_best),
                                        "",
                                        num(m.regrets[i]),
                                        "",
                                        m.queries_to_optimal[i] ? std::to_string(*m.queries_to_optimal[i]) : "",
                                        "",
                                        m.queries_to_optimal[i] ? "0" : "1"};
      for (std::size_t k = 0; k < iters; ++k) {
        if (k >= r.history.size()) {
          cells.insert(cells.end(), kIterColumns.size(), "");
          continue;
        }
        const IterationRecord& h = r.history[k];
        const std::size_t n = h.new_samples.size();
        cells.push_back(std::to_string(n));
        cells.push_back(std::to_string(h.top50_hits));
        cells.push_back(n ? num(static_cast<double>(h.top50_hits) / static_cast<double>(n)) : "");
        cells.push_back(h.kendall_tau_top50 ? num(*h.kendall_tau_top50) : "");
        cells.push_back(h.prediction_hash ? hex(h.prediction_hash) : "");
      }
      out += join(cells);
    }

    const RunSetSummary& s = m.summary;
    const bool any_hit = s.queries_to_optimal.count > 0;
    std::vector<std::string> cells = {kResultsSchema,
                                      meta.generated_at,
                                      "aggregate",
                                      m.method,
                                      m.strategy,
                                      m.predictor,
                                      "",
                                      std::to_string(s.runs),
                                      num(s.total_queries.mean),
                                      "",
                                      "",
                                      num(s.test_accuracy.mean),
                                      num(s.test_accuracy.sd),
                                      num(s.test_regret.mean),
                                      num(s.test_regret.sd),
                                      any_hit ? num(s.queries_to_optimal.mean) : "",
                                      any_hit ? num(s.queries_to_optimal.sd) : "",
                                      std::to_string(s.missed_optimum)};
    for (std::size_t k = 0; k < iters; ++k) {
      const bool have = k < s.top50_hit_fraction.size();
      cells.push_back("");
      cells.push_back("");
      cells.push_back(have ? num(s.top50_hit_fraction[k]) : "");
      cells.push_back(have && s.kendall_tau_top50[k] ? num(*s.kendall_tau_top50[k]) : "");
      cells.push_back("");
    }
    out += join(cells);
  }
  return out;
}

std::string format_json(const std::vector<MethodResults>& methods, const ResultsMeta& meta) {
  ordered_json j;
  j["schema"] = kResultsSchema;
  if (!meta.generated_at.empty()) j["generated_at"] = meta.generated_at;
  j["benchmark"] = meta.benchmark;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : meta.config) cfg[k] = v;
  j["config"] = cfg;

  ordered_json runs = ordered_json::array();
  ordered_json aggregates = ordered_json::array();
  for (const MethodResults& m : methods) {
    for (std::size_t i = 0; i < m.runs.size(); ++i) {
      const RunResult& r = m.runs[i];
      ordered_json jr;
      jr["method"] = m.method;
      if (!m.strategy.empty()) jr["strategy"] = m.strategy;
      if (!m.predictor.empty()) jr["predictor"] = m.predictor;
      jr["seed"] = r.seed;
      jr["total_queries"] = r.total_queries;
      jr["best_by_val"] = r.best_by_val;
      jr["best_val_acc"] = r.best_val_acc;
      jr["test_acc"] = r.test_acc_of_best;
      jr["test_regret"] = m.regrets[i];
      jr["queries_to_optimal"] = optional_json(m.queries_to_optimal[i]);
      jr["warnings"] = r.warnings;
      jr["query_log"] = r.query_log;
      jr["query_val"] = r.query_values;
      ordered_json hist = ordered_json::array();
      for (const IterationRecord& h : r.history) {
        ordered_json jh;
        jh["iteration"] = h.iteration;
        jh["new_samples"] = h.new_samples;
        jh["prediction_hash"] = hex(h.prediction_hash);
        jh["top50_hits"] = h.top50_hits;
        jh["kendall_tau_top50"] = optional_json(h.kendall_tau_top50);
        jh["first_hit_optimal_query"] = optional_json(h.first_hit_optimal_query);
        if (!h.top200_errors.empty()) jh["top200_errors"] = h.top200_errors;
        hist.push_back(std::move(jh));
      }
      jr["history"] = std::move(hist);
      runs.push_back(std::move(jr));
    }

    const RunSetSummary& s = m.summary;
    ordered_json ja;
    ja["method"] = m.method;
    if (!m.strategy.empty()) ja["strategy"] = m.strategy;
    if (!m.predictor.empty()) ja["predictor"] = m.predictor;
    ja["runs"] = s.runs;
    ja["total_queries"] = stat_json(s.total_queries);
    ja["test_acc"] = stat_json(s.test_accuracy);
    ja["test_regret"] = stat_json(s.test_regret);
    ja["queries_to_optimal"] = s.queries_to_optimal.count ? stat_json(s.queries_to_optimal) : ordered_json(nullptr);
    ja["missed_optimum"] = s.missed_optimum;
    ja["top50_hit_fraction"] = s.top50_hit_fraction;
    ordered_json taus = ordered_json::array();
    for (const auto& t : s.kendall_tau_top50) taus.push_back(optional_json(t));
    ja["kendall_tau_top50"] = std::move(taus);
    aggregates.push_back(std::move(ja));
  }
  j["runs"] = std::move(runs);
  j["aggregates"] = std::move(aggregates);
  return j.dump() + "\n";
}

ResultsFile read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw std::runtime_error(path.string() + ": empty results file");
  try {
    return text[first] == '{' ? read_json(text, path.string()) : read_csv(text, path.string());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": malformed results file: " + e.what());
  } catch (const std::logic_error& e) {
    throw std::runtime_error(path.string() + ": malformed results file: " + e.what());
  }
}

}  // namespace weaknas::cli
