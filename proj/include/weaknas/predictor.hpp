#pragma once
// Interchangeable accuracy regressors: MLP, gradient-boosted regression
// trees, random forest. All are fit on squared error and are deterministic
// given PredictorConfig::seed.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "weaknas/encoding.hpp"
#include "weaknas/mlp.hpp"
#include "weaknas/regression_tree.hpp"

namespace weaknas {

enum class PredictorKind { Mlp, Gbrt, RandomForest };

std::string to_string(PredictorKind kind);
PredictorKind parse_predictor_kind(const std::string& text);

struct GbrtConfig {
  std::size_t num_trees = 1000;
  int max_depth = 6;
  double shrinkage = 0.1;
  std::size_t min_leaf = 1;
};

struct ForestConfig {
  std::size_t num_trees = 1000;
  int max_depth = 0;  // unlimited
  double feature_fraction = 1.0 / 3.0;
  bool bootstrap = true;
  std::size_t min_leaf = 1;
};

struct PredictorConfig {
  PredictorKind kind = PredictorKind::Gbrt;
  MlpConfig mlp;
  GbrtConfig gbrt;
  ForestConfig forest;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on zero counts, shrinkage outside (0, 1]
  /// or feature_fraction outside (0, 1].
  void validate() const;
};

struct TrainingPair {
  FeatureVector features;
  double target = 0.0;  // percent accuracy
};

struct GbrtModel {
  double base = 0.0;
  double shrinkage = 0.1;
  std::vector<RegressionTree> trees;

  /// base + shrinkage * (sum of tree outputs, in tree order)
  double predict(std::span<const double> x) const;
};

struct ForestModel {
  std::vector<RegressionTree> trees;

  /// (sum of tree outputs, in tree order) / tree count
  double predict(std::span<const double> x) const;
};

struct MlpModel {
  Mlp net;
  double target_offset = 0.0;  // min training target
  double target_scale = 1.0;   // max - min; 0 for a constant fit

  double predict(std::span<const double> x) const;
};

class FittedPredictor {
 public:
  using Model = std::variant<MlpModel, GbrtModel, ForestModel>;

  FittedPredictor(Model model, std::size_t feature_length, std::vector<double> loss_trace);

  PredictorKind kind() const;
  std::size_t feature_length() const { return feature_length_; }
  const Model& model() const { return model_; }
  /// Per-epoch (MLP) or per-round (GBRT) training MSE; one entry per tree
  /// for the forest (out-of-bag is not tracked, the entry is the training
  /// MSE of the partial ensemble).
  const std::vector<double>& loss_trace() const { return loss_trace_; }

  /// Throws std::invalid_argument on length mismatch.
  double predict(std::span<const double> features) const;
  std::vector<double> predict(const FeatureMatrix& features) const;
  std::vector<double> predict(std::span<const FeatureVector> features) const;

  /// Debug dump. Trees are nested {feature, threshold, left, right} /
  /// {value} objects; MLP weights are one flat array.
  std::string to_json() const;
  static FittedPredictor from_json(const std::string& text);

 private:
  Model model_;
  std::size_t feature_length_;
  std::vector<double> loss_trace_;
};

/// Needs >= 2 pairs with consistent, finite features.
FittedPredictor fit(std::span<const TrainingPair> pairs, const PredictorConfig& config);
FittedPredictor fit(const FeatureMatrix& features, std::span<const double> targets, const PredictorConfig& config);

std::vector<double> predict(const FittedPredictor& model, std::span<const FeatureVector> features);

/// Max relative error between backprop gradients of the mean squared error
/// over `probe_pairs` and central finite differences (step 1e-5), for an MLP
/// built from config.mlp and config.seed. Biases are redrawn from
/// U(-0.1, 0.1) * init_scale first. Relative error per parameter is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6). Parameters whose
/// +-step flips a ReLU on some probe row are skipped.
double mlp_gradient_check(const PredictorConfig& config, std::span<const TrainingPair> probe_pairs);

}  // namespace weaknas
