#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <thread>

#include "CLI11.hpp"
#include "json_config.hpp"
#include "results_io.hpp"
#include "weaknas/benchmark.hpp"
#include "weaknas/cli.hpp"
#include "weaknas/metrics.hpp"
#include "weaknas/search.hpp"

namespace weaknas::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GeneratorArgs {
  std::string kind = "fixed";
  int edges = 6;
  int ops = 5;
  int max_nodes = 7;
  int max_edges = 9;
  int clusters = 4;
  double noise = 0.5;
  std::uint64_t seed = 0;

  SpaceSpec spec() const {
    const SpaceSpec s = parse_space_kind(kind) == SpaceKind::FixedDag
                            ? SpaceSpec::fixed_dag(edges, ops)
                            : SpaceSpec::variable_dag(max_nodes, max_edges, ops);
    s.validate();
    return s;
  }

  SyntheticParams params() const {
    SyntheticParams p;
    p.num_clusters = clusters;
    p.noise_sd = noise;
    p.seed = seed;
    return p;
  }
};

struct GenBenchArgs {
  GeneratorArgs gen;
  std::string output;
};

struct SearchArgs {
  std::string bench;
  GeneratorArgs gen;  // used when no --bench is given
  std::vector<std::string> methods;
  std::size_t iterations = 20;
  std::size_t samples = 100;
  std::size_t pool = 1000;
  std::string strategy = "uniform";
  std::string predictor = "gbrt";
  std::string encoding;  // default follows the space kind
  std::size_t trees = 1000;
  int depth = -1;  // -1: 6 for gbrt, unlimited for the forest
  double shrinkage = 0.1;
  std::size_t min_leaf = 1;
  double feature_fraction = 1.0 / 3.0;
  bool no_bootstrap = false;
  std::vector<std::size_t> hidden{1000, 1000, 1000, 1000};
  int epochs = 200;
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t budget = 0;  // 0: K * M
  std::size_t population = 100;
  std::size_t tournament = 10;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string output;
  std::string format;
  bool no_timestamp = false;
  bool stop_at_optimum = false;
  bool record_edf = false;
};

struct ReportArgs {
  std::vector<std::string> files;
  std::string curves_dir;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_generator_options(CLI::App* cmd, GeneratorArgs& g, const std::string& seed_flag) {
  cmd->add_option("--kind", g.kind, "Space kind")->check(CLI::IsMember({"fixed", "variable"}))->capture_default_str();
  cmd->add_option("--edges", g.edges, "Edges of a fixed cell")->capture_default_str();
  cmd->add_option("--ops", g.ops, "Operators per edge / node")->capture_default_str();
  cmd->add_option("--max-nodes", g.max_nodes, "Node limit of a variable cell")->capture_default_str();
  cmd->add_option("--max-edges", g.max_edges, "Edge limit of a variable cell")->capture_default_str();
  cmd->add_option("--clusters", g.clusters, "Accuracy peaks")->capture_default_str();
  cmd->add_option("--noise", g.noise, "Noise SD in accuracy points")->capture_default_str();
  cmd->add_option(seed_flag, g.seed, "Generator seed")->capture_default_str();
}

std::size_t default_jobs() {
  if (const char* env = std::getenv("WEAKNAS_JOBS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

std::string utc_timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for " + path);
}

int cmd_gen_bench(const GenBenchArgs& args, std::ostream& out) {
  SpaceSpec spec;
  try {
    spec = args.gen.spec();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (spec.enumerated_size() > kMaxSpaceSize) {
    throw UsageError(fmt::format("space of {} architectures exceeds the limit of {}", spec.enumerated_size(),
                                 kMaxSpaceSize));
  }
  TabularBenchmark bench = [&] {
    try {
      return generate_synthetic_benchmark(spec, args.gen.params());
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  save_benchmark(bench, args.output);
  const ArchIndex opt = bench.optimum_val_index();
  out << fmt::format("wrote {} architectures to {}\n", bench.size(), args.output);
  out << fmt::format("validation optimum: index {} (val {:.4f}, test {:.4f}); max test accuracy {:.4f}\n", opt,
                     bench.query(opt, Signal::Validation), bench.query(opt, Signal::Test),
                     bench.max_accuracy(Signal::Test));
  return kExitOk;
}

PredictorConfig predictor_config(const SearchArgs& a) {
  PredictorConfig p;
  p.kind = parse_predictor_kind(a.predictor);
  p.gbrt.num_trees = a.trees;
  p.gbrt.max_depth = a.depth < 0 ? 6 : a.depth;
  p.gbrt.shrinkage = a.shrinkage;
  p.gbrt.min_leaf = a.min_leaf;
  p.forest.num_trees = a.trees;
  p.forest.max_depth = a.depth < 0 ? 0 : a.depth;
  p.forest.feature_fraction = a.feature_fraction;
  p.forest.bootstrap = !a.no_bootstrap;
  p.forest.min_leaf = a.min_leaf;
  p.mlp.hidden = a.hidden;
  p.mlp.epochs = a.epochs;
  p.mlp.step_size = a.lr;
  p.mlp.batch_size = a.batch;
  return p;
}

std::vector<std::pair<std::string, std::string>> describe_config(const SearchArgs& a, const SearchConfig& sc,
                                                                 std::size_t budget) {
  std::vector<std::pair<std::string, std::string>> c;
  std::string methods;
  for (const std::string& m : a.methods) methods += (methods.empty() ? "" : " ") + m;
  c.emplace_back("methods", methods);
  c.emplace_back("runs", std::to_string(a.runs));
  c.emplace_back("seed", std::to_string(a.seed));
  c.emplace_back("K", std::to_string(sc.iterations));
  c.emplace_back("M", std::to_string(sc.samples_per_iter));
  c.emplace_back("N", std::to_string(sc.top_pool));
  c.emplace_back("strategy", to_string(sc.strategy));
  c.emplace_back("predictor", to_string(sc.predictor.kind));
  c.emplace_back("encoding", to_string(sc.encoding));
  switch (sc.predictor.kind) {
    case PredictorKind::Gbrt:
      c.emplace_back("trees", std::to_string(sc.predictor.gbrt.num_trees));
      c.emplace_back("depth", std::to_string(sc.predictor.gbrt.max_depth));
      c.emplace_back("shrinkage", fmt::format("{}", sc.predictor.gbrt.shrinkage));
      c.emplace_back("min_leaf", std::to_string(sc.predictor.gbrt.min_leaf));
      break;
    case PredictorKind::RandomForest:
      c.emplace_back("trees", std::to_string(sc.predictor.forest.num_trees));
      c.emplace_back("depth", std::to_string(sc.predictor.forest.max_depth));
      c.emplace_back("feature_fraction", fmt::format("{}", sc.predictor.forest.feature_fraction));
      c.emplace_back("bootstrap", sc.predictor.forest.bootstrap ? "true" : "false");
      c.emplace_back("min_leaf", std::to_string(sc.predictor.forest.min_leaf));
      break;
    case PredictorKind::Mlp: {
      std::string hidden;
      for (std::size_t h : sc.predictor.mlp.hidden) hidden += (hidden.empty() ? "" : ",") + std::to_string(h);
      c.emplace_back("hidden", hidden);
      c.emplace_back("epochs", std::to_string(sc.predictor.mlp.epochs));
      c.emplace_back("lr", fmt::format("{}", sc.predictor.mlp.step_size));
      c.emplace_back("batch", std::to_string(sc.predictor.mlp.batch_size));
      break;
    }
  }
  c.emplace_back("budget", std::to_string(budget));
  c.emplace_back("population", std::to_string(a.population));
  c.emplace_back("tournament", std::to_string(a.tournament));
  c.emplace_back("stop_at_optimum", a.stop_at_optimum ? "true" : "false");
  return c;
}

/// Runs tasks 0..count-1 on `jobs` threads; results land at their own index.
template <typename Task>
void run_parallel(std::size_t count, std::size_t jobs, Task task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

int cmd_search(SearchArgs args, std::ostream& out) {
  if (args.methods.empty()) args.methods.push_back("weaknas");
  {
    std::vector<std::string> seen = args.methods;
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw UsageError("a method is listed twice");
  }
  if (args.runs == 0) throw UsageError("--runs must be at least 1");

  std::unique_ptr<TabularBenchmark> bench;
  if (!args.bench.empty()) {
    bench = std::make_unique<TabularBenchmark>(load_benchmark(args.bench));
  } else {
    try {
      bench = std::make_unique<TabularBenchmark>(generate_synthetic_benchmark(args.gen.spec(), args.gen.params()));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  SearchConfig sc;
  std::size_t budget = 0;
  try {
    sc.iterations = args.iterations;
    sc.samples_per_iter = args.samples;
    sc.top_pool = args.pool;
    sc.strategy = parse_sampling_strategy(args.strategy);
    sc.predictor = predictor_config(args);
    sc.encoding = args.encoding.empty() ? default_encoding(bench->spec().kind) : parse_encoding(args.encoding);
    sc.stop_at_optimum = args.stop_at_optimum;
    sc.record_edf = args.record_edf;
    sc.validate(bench->spec());
    budget = args.budget ? args.budget : std::min(args.iterations * args.samples, bench->size());
    if (budget > bench->size()) throw std::invalid_argument("--budget exceeds the space size");
    for (const std::string& m : args.methods) {
      if (m == "evolution" && (args.population == 0 || args.population > budget ||
                               args.tournament == 0 || args.tournament > args.population)) {
        throw std::invalid_argument("evolution needs 1 <= tournament <= population <= budget");
      }
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::string format = args.format;
  if (format.empty()) {
    format = std::filesystem::path(args.output).extension() == ".json" ? "json" : "csv";
  }

  const bool needs_features = std::find(args.methods.begin(), args.methods.end(), "weaknas") != args.methods.end();
  const FeatureMatrix features = needs_features ? encode_space(bench->space(), sc.encoding) : FeatureMatrix{};

  std::vector<MethodResults> methods;
  for (const std::string& name : args.methods) {
    MethodResults m;
    m.method = name;
    if (name == "weaknas") {
      m.strategy = to_string(sc.strategy);
      m.predictor = to_string(sc.predictor.kind);
    }
    m.runs.resize(args.runs);
    methods.push_back(std::move(m));
  }

  const std::size_t total = methods.size() * args.runs;
  const EvolutionConfig evo{args.population, args.tournament};
  run_parallel(total, args.jobs, [&](std::size_t task) {
    MethodResults& m = methods[task / args.runs];
    const std::size_t run = task % args.runs;
    const std::uint64_t seed = args.seed + run;
    if (m.method == "weaknas") {
      SearchConfig cfg = sc;
      cfg.seed = seed;
      m.runs[run] = run_weak_nas(*bench, cfg, features);
    } else if (m.method == "random") {
      m.runs[run] = run_random_search(*bench, budget, seed, args.stop_at_optimum);
    } else {
      m.runs[run] = run_regularized_evolution(*bench, budget, evo, seed, args.stop_at_optimum);
    }
  });

  for (MethodResults& m : methods) {
    for (const RunResult& r : m.runs) {
      m.regrets.push_back(test_regret(r, *bench));
      m.queries_to_optimal.push_back(queries_to_optimal(r, *bench));
    }
    m.summary = aggregate(m.runs, *bench);
  }

  ResultsMeta meta;
  meta.benchmark = args.bench.empty() ? "synthetic" : args.bench;
  if (!args.no_timestamp) meta.generated_at = utc_timestamp();
  meta.config = describe_config(args, sc, budget);
  const std::string text = format == "json" ? format_json(methods, meta) : format_csv(methods, meta);
  if (args.output.empty() || args.output == "-") {
    out << text;
    return kExitOk;
  }
  write_file(args.output, text);
  for (const MethodResults& m : methods) {
    const RunSetSummary& s = m.summary;
    out << fmt::format("{:<10} runs {:>4}  test {:.4f} +- {:.4f}  regret {:.4f}  queries-to-optimal ", m.method,
                       s.runs, s.test_accuracy.mean, s.test_accuracy.sd, s.test_regret.mean);
    if (s.queries_to_optimal.count) {
      out << fmt::format("{:.1f} +- {:.1f}", s.queries_to_optimal.mean, s.queries_to_optimal.sd);
    } else {
      out << "-";
    }
    out << fmt::format("  missed {}\n", s.missed_optimum);
    for (const RunResult& r : m.runs) {
      for (const std::string& w : r.warnings) out << fmt::format("warning ({} seed {}): {}\n", m.method, r.seed, w);
    }
  }
  return kExitOk;
}

void write_curves(const ResultsFile& file, const std::string& dir, bool prefix) {
  std::map<std::string, std::vector<const RunTrace*>> by_method;
  for (const RunTrace& t : file.runs) by_method[t.method].push_back(&t);
  const std::string stem = std::filesystem::path(file.path).stem().string();
  for (const auto& [method, traces] : by_method) {
    const std::string base = (std::filesystem::path(dir) / ((prefix ? stem + "_" : "") + method)).string();

    std::size_t length = 0;
    for (const RunTrace* t : traces) length = std::max(length, t->query_values.size());
    std::vector<std::vector<double>> best(traces.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto& q = traces[i]->query_values;
      double running = -INFINITY;
      for (std::size_t x = 0; x < length; ++x) {
        // Runs that ended early keep their final best.
        if (x < q.size()) running = std::max(running, q[x]);
        best[i].push_back(running);
      }
    }
    std::string csv = "x,y,y_lo,y_hi\n";
    for (std::size_t x = 0; x < length; ++x) {
      std::vector<double> col;
      for (const auto& b : best) col.push_back(b[x]);
      const Stat s = describe(col);
      csv += fmt::format("{},{},{},{}\n", x + 1, s.mean, s.mean - s.sd, s.mean + s.sd);
    }
    write_file(base + "_best.csv", csv);

    std::size_t iters = 0;
    for (const RunTrace* t : traces) iters = std::max(iters, t->top50_fraction.size());
    std::string top = "iteration,top50_fraction,kendall_tau\n";
    std::string edf_csv = "iteration,error,edf\n";
    bool any_edf = false;
    for (std::size_t k = 0; k < iters; ++k) {
      double frac = 0.0;
      std::size_t nf = 0;
      double tau = 0.0;
      std::size_t nt = 0;
      std::vector<double> errors;
      for (const RunTrace* t : traces) {
        if (k >= t->top50_fraction.size()) continue;
        frac += t->top50_fraction[k];
        ++nf;
        if (t->kendall_tau[k]) {
          tau += *t->kendall_tau[k];
          ++nt;
        }
        errors.insert(errors.end(), t->top200_errors[k].begin(), t->top200_errors[k].end());
      }
      top += fmt::format("{},{},{}\n", k + 1, frac / static_cast<double>(nf),
                         nt ? fmt::format("{}", tau / static_cast<double>(nt)) : "");
      if (!errors.empty()) {
        any_edf = true;
        std::vector<double> grid;
        for (int g = 0; g <= 200; ++g) grid.push_back(0.5 * g);
        const std::vector<double> f = edf(errors, grid);
        for (std::size_t g = 0; g < grid.size(); ++g) edf_csv += fmt::format("{},{},{}\n", k + 1, grid[g], f[g]);
      }
    }
    write_file(base + "_top50.csv", top);
    if (any_edf) write_file(base + "_edf.csv", edf_csv);
  }
}

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err) {
  std::vector<ResultsFile> files;
  for (const std::string& f : args.files) files.push_back(read_results(f));

  out << fmt::format("{:<24} {:<10} {:>5} {:>10} {:>8} {:>10} {:>8} {:>12} {:>10} {:>6}\n", "file", "method", "runs",
                     "test_acc", "sd", "regret", "sd", "q_to_opt", "sd", "missed");
  for (const ResultsFile& f : files) {
    const std::string name = std::filesystem::path(f.path).filename().string();
    for (const SummaryRow& r : f.summaries) {
      const std::string q = r.queries_to_optimal ? fmt::format("{:.1f}", r.queries_to_optimal->mean) : "-";
      const std::string qsd = r.queries_to_optimal ? fmt::format("{:.1f}", r.queries_to_optimal->sd) : "-";
      out << fmt::format("{:<24} {:<10} {:>5} {:>10.4f} {:>8.4f} {:>10.4f} {:>8.4f} {:>12} {:>10} {:>6}\n", name,
                         r.method, r.runs, r.test_accuracy.mean, r.test_accuracy.sd, r.test_regret.mean,
                         r.test_regret.sd, q, qsd, r.missed_optimum);
    }
  }

  if (!args.curves_dir.empty()) {
    std::filesystem::create_directories(args.curves_dir);
    for (const ResultsFile& f : files) {
      if (!f.has_traces) {
        err << f.path << ": CSV results carry no query logs; curves need JSON results\n";
        continue;
      }
      write_curves(f, args.curves_dir, files.size() > 1);
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Progressive weak-predictor architecture search", "weaknas"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  GenBenchArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-bench", "Write a synthetic tabular benchmark");
  add_generator_options(gen_cmd, gen.gen, "--seed");
  gen_cmd->add_option("-o,--output", gen.output, "Output benchmark file")->required();

  SearchArgs search;
  search.jobs = default_jobs();
  CLI::App* search_cmd = app.add_subcommand("search", "Run searchers on a benchmark");
  std::string config_file;  // consumed by expand_config before parsing
  search_cmd->add_option("--config", config_file, "JSON file mirroring the command-line flags");
  search_cmd->add_option("--bench", search.bench, "Benchmark file (synthetic when omitted)");
  add_generator_options(search_cmd, search.gen, "--bench-seed");
  search_cmd->add_option("--method", search.methods, "weaknas, random or evolution (repeatable)")
      ->check(CLI::IsMember({"weaknas", "random", "evolution"}));
  search_cmd->add_option("--K", search.iterations, "Iterations")->capture_default_str();
  search_cmd->add_option("--M", search.samples, "Samples per iteration")->capture_default_str();
  search_cmd->add_option("--N", search.pool, "Top-N pool size")->capture_default_str();
  search_cmd->add_option("--strategy", search.strategy, "uniform, linear, exponential or nn")->capture_default_str();
  search_cmd->add_option("--predictor", search.predictor, "gbrt, mlp or forest")->capture_default_str();
  search_cmd->add_option("--encoding", search.encoding, "onehot or adjacency (default follows the space)");
  search_cmd->add_option("--trees", search.trees, "GBRT rounds / forest trees")->capture_default_str();
  search_cmd->add_option("--depth", search.depth, "Tree depth limit, 0 unlimited");
  search_cmd->add_option("--shrinkage", search.shrinkage, "GBRT learning rate")->capture_default_str();
  search_cmd->add_option("--min-leaf", search.min_leaf, "Minimum samples per leaf")->capture_default_str();
  search_cmd->add_option("--feature-fraction", search.feature_fraction, "Forest features per split")
      ->capture_default_str();
  search_cmd->add_flag("--no-bootstrap", search.no_bootstrap, "Grow forest trees on all samples");
  search_cmd->add_option("--hidden", search.hidden, "MLP hidden widths")->delimiter(',')->capture_default_str();
  search_cmd->add_option("--epochs", search.epochs, "MLP epochs")->capture_default_str();
  search_cmd->add_option("--lr", search.lr, "MLP Adam step size")->capture_default_str();
  search_cmd->add_option("--batch", search.batch, "MLP batch size")->capture_default_str();
  search_cmd->add_option("--budget", search.budget, "Baseline query budget (default K*M)");
  search_cmd->add_option("--population", search.population, "Evolution population")->capture_default_str();
  search_cmd->add_option("--tournament", search.tournament, "Evolution tournament size")->capture_default_str();
  search_cmd->add_option("--runs", search.runs, "Independent runs per method")->capture_default_str();
  search_cmd->add_option("--seed", search.seed, "Base seed; run i uses seed + i")->capture_default_str();
  search_cmd->add_option("--jobs", search.jobs, "Worker threads (default WEAKNAS_JOBS or 1)");
  search_cmd->add_option("-o,--output", search.output, "Results file (stdout when omitted)");
  search_cmd->add_option("--format", search.format, "csv or json (default from the extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  search_cmd->add_flag("--no-timestamp", search.no_timestamp, "Omit the generation time");
  search_cmd->add_flag("--stop-at-optimum", search.stop_at_optimum, "End each run once the optimum is queried");
  search_cmd->add_flag("--record-edf", search.record_edf, "Store predicted top-200 errors per iteration");

  ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand("report", "Summarize results files");
  report_cmd->add_option("files", report.files, "Results files")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--curves-dir", report.curves_dir, "Directory for curve CSVs");

  std::vector<std::string> expanded = args;
  if (!args.empty() && args.front() == "search") {
    try {
      expanded = expand_config({args.begin() + 1, args.end()});
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    expanded.insert(expanded.begin(), "search");
  }

  try {
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_bench(gen, out);
    if (search_cmd->parsed()) return cmd_search(search, out);
    return cmd_report(report, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace weaknas::cli
