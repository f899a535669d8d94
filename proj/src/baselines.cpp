#include <algorithm>
#include <stdexcept>

#include "search_impl.hpp"

namespace weaknas {

RunResult run_random_search(const TabularBenchmark& bench, std::size_t budget, std::uint64_t seed,
                            bool stop_at_optimum, Signal signal) {
  if (budget == 0 || budget > bench.size()) throw std::invalid_argument("budget must lie in [1, space size]");
  RunResult result;
  result.method = "random";
  result.seed = seed;
  Rng rng(seed);
  SampleSet sampled(bench.size());
  IterationRecord record;
  record.iteration = 1;
  const std::vector<ArchIndex> order = initial_sample(bench.size(), budget, rng);
  detail::query_all(bench, signal, order, sampled, record, stop_at_optimum);
  result.history.push_back(std::move(record));
  detail::finalize(result, bench, sampled);
  return result;
}

RunResult run_regularized_evolution(const TabularBenchmark& bench, std::size_t budget, const EvolutionConfig& config,
                                    std::uint64_t seed, bool stop_at_optimum, Signal signal) {
  if (budget == 0 || budget > bench.size()) throw std::invalid_argument("budget must lie in [1, space size]");
  if (config.population == 0 || config.population > budget) {
    throw std::invalid_argument("population must lie in [1, budget]");
  }
  if (config.tournament == 0 || config.tournament > config.population) {
    throw std::invalid_argument("tournament must lie in [1, population]");
  }
  RunResult result;
  result.method = "evolution";
  result.seed = seed;
  Rng rng(seed);
  SampleSet sampled(bench.size());
  IterationRecord record;
  record.iteration = 1;

  // Same draw sequence as random search for the initial population.
  const std::vector<ArchIndex> init = initial_sample(bench.size(), config.population, rng);
  bool done = detail::query_all(bench, signal, init, sampled, record, stop_at_optimum);
  std::vector<ArchIndex> population(init.begin(), init.end());  // oldest first
  std::size_t oldest = 0;                                       // ring position

  while (!done && sampled.size() < budget) {
    const std::vector<std::uint32_t> picks = rng.sample_without_replacement(
        static_cast<std::uint32_t>(population.size()), static_cast<std::uint32_t>(config.tournament));
    ArchIndex parent = population[picks[0]];
    for (std::uint32_t p : picks) {
      const ArchIndex a = population[p];
      const double va = bench.query(a, signal);
      const double vp = bench.query(parent, signal);
      if (va > vp || (va == vp && a < parent)) parent = a;
    }
    std::vector<ArchIndex> fresh;
    for (ArchIndex v : bench.space().neighbors(parent)) {
      if (!sampled.contains(v)) fresh.push_back(v);
    }
    ArchIndex child;
    if (!fresh.empty()) {
      child = fresh[rng.uniform_index(fresh.size())];
    } else {
      // Rejection from the whole space; the remainder is nonempty since
      // sampled.size() < budget <= space size.
      do {
        child = static_cast<ArchIndex>(rng.uniform_index(bench.size()));
      } while (sampled.contains(child));
    }
    const ArchIndex batch[1] = {child};
    done = detail::query_all(bench, signal, batch, sampled, record, stop_at_optimum);
    population[oldest] = child;
    oldest = (oldest + 1) % population.size();
  }
  result.history.push_back(std::move(record));
  detail::finalize(result, bench, sampled);
  return result;
}

}  // namespace weaknas
