#pragma once
// Progressive weak-predictor search and the baseline searchers.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weaknas/benchmark.hpp"
#include "weaknas/encoding.hpp"
#include "weaknas/predictor.hpp"
#include "weaknas/rng.hpp"

namespace weaknas {

enum class SamplingStrategy { Uniform, LinearDecay, ExponentialDecay, NearestNeighbor };

std::string to_string(SamplingStrategy strategy);
SamplingStrategy parse_sampling_strategy(const std::string& text);

struct SearchConfig {
  std::size_t iterations = 20;         // K
  std::size_t samples_per_iter = 100;  // M
  std::size_t top_pool = 1000;         // N
  SamplingStrategy strategy = SamplingStrategy::Uniform;
  PredictorConfig predictor;
  Encoding encoding = Encoding::OneHot;
  Signal signal = Signal::Validation;
  std::uint64_t seed = 0;
  /// End the run as soon as the signal optimum has been queried.
  bool stop_at_optimum = false;
  /// Store the errors of the predicted top-200 unsampled architectures.
  bool record_edf = false;

  /// Throws std::invalid_argument for zero K/M/N, M > N, or an encoding that
  /// does not fit the space.
  void validate(const SpaceSpec& spec) const;
};

/// Queried architectures in query order. Refuses duplicates.
class SampleSet {
 public:
  explicit SampleSet(std::size_t space_size) : member_(space_size, false) {}

  void add(ArchIndex index, double value);
  bool contains(ArchIndex index) const { return member_[index]; }
  std::size_t size() const { return indices_.size(); }
  std::size_t space_size() const { return member_.size(); }
  std::size_t remaining() const { return member_.size() - indices_.size(); }
  const std::vector<ArchIndex>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<bool> member_;
  std::vector<ArchIndex> indices_;
  std::vector<double> values_;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  std::vector<ArchIndex> new_samples;
  /// FNV-1a over the bit patterns of the whole-space predictions of the
  /// predictor fit at the end of this iteration; 0 when no predictor was fit.
  std::uint64_t prediction_hash = 0;
  std::size_t top50_hits = 0;  // new samples inside the true top-50
  std::optional<double> kendall_tau_top50;
  std::optional<std::size_t> first_hit_optimal_query;  // set on the iteration that hit it
  std::vector<double> top200_errors;                   // only with record_edf
};

struct RunResult {
  std::string method;
  std::uint64_t seed = 0;
  ArchIndex best_by_val = 0;
  double best_val_acc = 0.0;
  double test_acc_of_best = 0.0;
  std::size_t total_queries = 0;
  std::vector<ArchIndex> query_log;
  std::vector<double> query_values;  // signal value of each query
  std::vector<IterationRecord> history;
  std::vector<std::string> warnings;
};

/// M distinct indices, uniform without replacement, in draw order.
std::vector<ArchIndex> initial_sample(std::size_t space_size, std::size_t count, Rng& rng);

/// Normalized pool weights, best rank first:
///   Uniform 1, LinearDecay N - r + 1, ExponentialDecay exp(-5 r / N).
std::vector<double> strategy_weights(SamplingStrategy strategy, std::size_t pool_size);

/// Unsampled indices with the `pool_size` highest scores, best first; ties go
/// to the lower index.
std::vector<ArchIndex> top_n_pool(std::span<const double> scores, const SampleSet& sampled, std::size_t pool_size);

/// Draws `count` pool members without replacement, renormalizing the
/// strategy weights after each draw. N beyond the unsampled remainder is
/// clamped and reported through `warnings`. Not for NearestNeighbor.
std::vector<ArchIndex> sampling_stage(std::span<const double> scores, const SampleSet& sampled, std::size_t count,
                                      std::size_t pool_size, SamplingStrategy strategy, Rng& rng,
                                      std::vector<std::string>* warnings = nullptr);

/// Scores the space with `model` and samples from it.
std::vector<ArchIndex> sampling_stage(const FittedPredictor& model, const FeatureMatrix& space_features,
                                      const SampleSet& sampled, std::size_t count, std::size_t pool_size,
                                      SamplingStrategy strategy, Rng& rng,
                                      std::vector<std::string>* warnings = nullptr);

/// Hill climbing from Top-N starts on the true signal. Every newly touched
/// architecture (starts included) is charged against `count`; the result is
/// the new queries in query order, at most `count` of them.
std::vector<ArchIndex> nearest_neighbor_sampling(std::span<const double> scores, const SampleSet& sampled,
                                                 std::size_t count, std::size_t pool_size,
                                                 const TabularBenchmark& bench, Signal signal, Rng& rng);

/// Fits a fresh predictor on every sampled architecture.
FittedPredictor learning_stage(const SampleSet& sampled, const PredictorConfig& config,
                               const FeatureMatrix& space_features);

RunResult run_weak_nas(const TabularBenchmark& bench, const SearchConfig& config);
/// Same, reusing features from encode_space(bench.space(), config.encoding).
RunResult run_weak_nas(const TabularBenchmark& bench, const SearchConfig& config,
                       const FeatureMatrix& space_features);

RunResult run_random_search(const TabularBenchmark& bench, std::size_t budget, std::uint64_t seed,
                            bool stop_at_optimum = false, Signal signal = Signal::Validation);

struct EvolutionConfig {
  std::size_t population = 100;
  std::size_t tournament = 10;
};

/// Aging evolution. Children are uniformly chosen unqueried neighbors of the
/// tournament winner; a random unqueried architecture is used when the winner
/// has none left.
RunResult run_regularized_evolution(const TabularBenchmark& bench, std::size_t budget, const EvolutionConfig& config,
                                    std::uint64_t seed, bool stop_at_optimum = false,
                                    Signal signal = Signal::Validation);

}  // namespace weaknas
