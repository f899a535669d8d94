#include "weaknas/search.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "search_impl.hpp"
#include "weaknas/metrics.hpp"

namespace weaknas {

std::string to_string(SamplingStrategy strategy) {
  switch (strategy) {
    case SamplingStrategy::Uniform:
      return "uniform";
    case SamplingStrategy::LinearDecay:
      return "linear";
    case SamplingStrategy::ExponentialDecay:
      return "exponential";
    case SamplingStrategy::NearestNeighbor:
      return "nn";
  }
  return "unknown";
}

SamplingStrategy parse_sampling_strategy(const std::string& text) {
  if (text == "uniform") return SamplingStrategy::Uniform;
  if (text == "linear" || text == "linear-decay") return SamplingStrategy::LinearDecay;
  if (text == "exponential" || text == "exponential-decay") return SamplingStrategy::ExponentialDecay;
  if (text == "nn" || text == "nearest-neighbor") return SamplingStrategy::NearestNeighbor;
  throw std::invalid_argument("unknown strategy '" + text + "' (expected uniform, linear, exponential or nn)");
}

void SearchConfig::validate(const SpaceSpec& spec) const {
  if (iterations == 0) throw std::invalid_argument("K must be positive");
  if (samples_per_iter == 0) throw std::invalid_argument("M must be positive");
  if (top_pool == 0) throw std::invalid_argument("N must be positive");
  if (samples_per_iter > top_pool) throw std::invalid_argument("M must not exceed N");
  check_encoding(spec, encoding);
  predictor.validate();
}

void SampleSet::add(ArchIndex index, double value) {
  if (index >= member_.size()) throw std::out_of_range("sample index outside the space");
  if (member_[index]) throw std::logic_error("architecture " + std::to_string(index) + " queried twice");
  member_[index] = true;
  indices_.push_back(index);
  values_.push_back(value);
}

std::vector<ArchIndex> initial_sample(std::size_t space_size, std::size_t count, Rng& rng) {
  if (count > space_size) throw std::invalid_argument("initial sample larger than the space");
  return rng.sample_without_replacement(static_cast<std::uint32_t>(space_size), static_cast<std::uint32_t>(count));
}

std::vector<double> strategy_weights(SamplingStrategy strategy, std::size_t pool_size) {
  std::vector<double> w(pool_size, 1.0);
  const double n = static_cast<double>(pool_size);
  for (std::size_t i = 0; i < pool_size; ++i) {
    const double r = static_cast<double>(i + 1);
    switch (strategy) {
      case SamplingStrategy::LinearDecay:
        w[i] = n - r + 1.0;
        break;
      case SamplingStrategy::ExponentialDecay:
        w[i] = std::exp(-5.0 * r / n);
        break;
      default:
        break;
    }
  }
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return w;
}

std::vector<ArchIndex> top_n_pool(std::span<const double> scores, const SampleSet& sampled, std::size_t pool_size) {
  std::vector<ArchIndex> candidates;
  candidates.reserve(sampled.remaining());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!sampled.contains(static_cast<ArchIndex>(i))) candidates.push_back(static_cast<ArchIndex>(i));
  }
  const auto better = [&](ArchIndex a, ArchIndex b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  const std::size_t keep = std::min(pool_size, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    better);
  candidates.resize(keep);
  return candidates;
}

std::vector<ArchIndex> sampling_stage(std::span<const double> scores, const SampleSet& sampled, std::size_t count,
                                      std::size_t pool_size, SamplingStrategy strategy, Rng& rng,
                                      std::vector<std::string>* warnings) {
  if (strategy == SamplingStrategy::NearestNeighbor) {
    throw std::invalid_argument("nearest-neighbor sampling needs the benchmark");
  }
  if (scores.size() != sampled.space_size()) throw std::invalid_argument("score count differs from space size");
  if (count > sampled.remaining()) throw std::invalid_argument("M exceeds the unsampled remainder");
  if (pool_size > sampled.remaining() && warnings) {
    warnings->push_back("N=" + std::to_string(pool_size) + " clamped to the " +
                        std::to_string(sampled.remaining()) + " unsampled architectures");
  }
  const std::vector<ArchIndex> pool = top_n_pool(scores, sampled, pool_size);
  if (count > pool.size()) throw std::invalid_argument("M exceeds the Top-N pool");
  std::vector<double> w = strategy_weights(strategy, pool.size());
  std::vector<ArchIndex> out;
  out.reserve(count);
  for (std::size_t d = 0; d < count; ++d) {
    double total = 0.0;
    for (double v : w) total += v;
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    std::size_t pick = pool.size();
    std::size_t last_live = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (w[i] == 0.0) continue;
      last_live = i;
      acc += w[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    // Rounding can leave u at the very top of the cumulative sum.
    if (pick == pool.size()) pick = last_live;
    out.push_back(pool[pick]);
    w[pick] = 0.0;
  }
  return out;
}

std::vector<ArchIndex> sampling_stage(const FittedPredictor& model, const FeatureMatrix& space_features,
                                      const SampleSet& sampled, std::size_t count, std::size_t pool_size,
                                      SamplingStrategy strategy, Rng& rng, std::vector<std::string>* warnings) {
  const std::vector<double> scores = model.predict(space_features);
  return sampling_stage(scores, sampled, count, pool_size, strategy, rng, warnings);
}

FittedPredictor learning_stage(const SampleSet& sampled, const PredictorConfig& config,
                               const FeatureMatrix& space_features) {
  if (sampled.size() == 0) throw std::invalid_argument("learning stage needs at least one sample");
  FeatureMatrix features;
  for (ArchIndex i : sampled.indices()) features.append_row(space_features.row(i));
  return fit(features, sampled.values(), config);
}

namespace detail {

std::uint64_t hash_scores(std::span<const double> scores) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double s : scores) {
    auto bits = std::bit_cast<std::uint64_t>(s);
    for (int b = 0; b < 8; ++b) {
      h ^= bits & 0xffU;
      h *= 0x100000001b3ULL;
      bits >>= 8;
    }
  }
  return h;
}

void finalize(RunResult& result, const TabularBenchmark& bench, const SampleSet& sampled) {
  result.total_queries = sampled.size();
  result.query_log = sampled.indices();
  result.query_values = sampled.values();
  if (sampled.size() == 0) return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < sampled.size(); ++i) {
    const double v = sampled.values()[i];
    const double b = sampled.values()[best];
    if (v > b || (v == b && sampled.indices()[i] < sampled.indices()[best])) best = i;
  }
  result.best_by_val = sampled.indices()[best];
  result.best_val_acc = sampled.values()[best];
  result.test_acc_of_best = bench.query(result.best_by_val, Signal::Test);
}

bool query_all(const TabularBenchmark& bench, Signal signal, std::span<const ArchIndex> batch, SampleSet& sampled,
               IterationRecord& record, bool stop_at_optimum) {
  const ArchIndex optimum = bench.optimum_index(signal);
  for (ArchIndex a : batch) {
    sampled.add(a, bench.query(a, signal));
    record.new_samples.push_back(a);
    if (a == optimum) {
      record.first_hit_optimal_query = sampled.size();
      if (stop_at_optimum) return true;
    }
  }
  return false;
}

}  // namespace detail

RunResult run_weak_nas(const TabularBenchmark& bench, const SearchConfig& config) {
  config.validate(bench.spec());
  return run_weak_nas(bench, config, encode_space(bench.space(), config.encoding));
}

RunResult run_weak_nas(const TabularBenchmark& bench, const SearchConfig& config,
                       const FeatureMatrix& space_features) {
  config.validate(bench.spec());
  if (space_features.rows() != bench.size()) throw std::invalid_argument("feature rows differ from space size");

  RunResult result;
  result.method = "weaknas";
  result.seed = config.seed;
  Rng rng(config.seed);
  SampleSet sampled(bench.size());

  std::vector<ArchIndex> top50 = bench.top_indices(std::min<std::size_t>(50, bench.size()), Signal::Validation);
  std::vector<double> top50_truth;
  for (ArchIndex a : top50) top50_truth.push_back(bench.query(a, Signal::Validation));
  std::vector<ArchIndex> top50_sorted = top50;
  std::sort(top50_sorted.begin(), top50_sorted.end());

  if (config.iterations * config.samples_per_iter > bench.size()) {
    result.warnings.push_back("budget K*M exceeds the space; the final iteration's M is clamped");
  }
  if (config.top_pool > bench.size()) {
    result.warnings.push_back("N exceeds the space size and is clamped");
  }

  std::vector<double> scores;
  bool done = false;
  bool pool_warned = config.top_pool > bench.size();
  for (std::size_t k = 1; k <= config.iterations && !done && sampled.remaining() > 0; ++k) {
    IterationRecord record;
    record.iteration = k;
    const std::size_t m = std::min(config.samples_per_iter, sampled.remaining());
    std::vector<ArchIndex> batch;
    if (k == 1) {
      batch = initial_sample(bench.size(), m, rng);
    } else if (config.strategy == SamplingStrategy::NearestNeighbor) {
      batch = nearest_neighbor_sampling(scores, sampled, m, config.top_pool, bench, config.signal, rng);
    } else {
      const bool clamps = config.top_pool > sampled.remaining();
      batch = sampling_stage(scores, sampled, m, config.top_pool, config.strategy, rng,
                             clamps && !pool_warned ? &result.warnings : nullptr);
      pool_warned = pool_warned || clamps;
    }
    done = detail::query_all(bench, config.signal, batch, sampled, record, config.stop_at_optimum);
    for (ArchIndex a : record.new_samples) {
      record.top50_hits += std::binary_search(top50_sorted.begin(), top50_sorted.end(), a) ? 1 : 0;
    }

    if (!done && sampled.size() >= 2) {
      PredictorConfig pc = config.predictor;
      pc.seed = derive_seed(config.seed, k);
      const FittedPredictor model = learning_stage(sampled, pc, space_features);
      scores = model.predict(space_features);
      record.prediction_hash = detail::hash_scores(scores);
      if (top50.size() >= 2) {
        std::vector<double> pred;
        for (ArchIndex a : top50) pred.push_back(scores[a]);
        record.kendall_tau_top50 = kendall_tau(pred, top50_truth);
      }
      if (config.record_edf) {
        for (ArchIndex a : top_n_pool(scores, sampled, 200)) {
          record.top200_errors.push_back(100.0 - bench.query(a, Signal::Validation));
        }
      }
    } else if (!done && k < config.iterations) {
      // A single sample cannot be fit; fall back to uniform scores.
      scores.assign(bench.size(), 0.0);
    }
    result.history.push_back(std::move(record));
  }
  detail::finalize(result, bench, sampled);
  return result;
}

}  // namespace weaknas
