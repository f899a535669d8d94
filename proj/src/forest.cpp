#include <numeric>

#include "predictor_impl.hpp"
#include "weaknas/rng.hpp"

namespace weaknas {

double ForestModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const RegressionTree& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

namespace detail {

FittedPredictor fit_forest(const FeatureMatrix& features, std::span<const double> targets,
                           const PredictorConfig& config) {
  const ForestConfig& cfg = config.forest;
  const std::size_t n = features.rows();

  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::uint32_t{0});
  // Without bootstrap every tree sees the same rows, so sort once.
  std::optional<PresortedColumns> shared;
  if (!cfg.bootstrap) shared.emplace(features, all_rows);

  ForestModel model;
  model.trees.reserve(cfg.num_trees);
  std::vector<double> running(n, 0.0);
  std::vector<double> trace;
  trace.reserve(cfg.num_trees);
  std::vector<double> bag_targets;
  for (std::size_t t = 0; t < cfg.num_trees; ++t) {
    // Each tree has its own stream so results do not depend on build order.
    const std::uint64_t tree_seed = derive_seed(config.seed, t);
    TreeParams params;
    params.max_depth = cfg.max_depth;
    params.min_leaf = cfg.min_leaf;
    params.feature_fraction = cfg.feature_fraction;
    params.seed = derive_seed(tree_seed, 1);

    RegressionTree tree;
    if (cfg.bootstrap) {
      Rng rng(tree_seed);
      std::vector<std::uint32_t> rows(n);
      for (auto& r : rows) r = static_cast<std::uint32_t>(rng.uniform_index(n));
      bag_targets.resize(n);
      for (std::size_t k = 0; k < n; ++k) bag_targets[k] = targets[rows[k]];
      const PresortedColumns columns(features, std::move(rows));
      tree = grow_tree(columns, bag_targets, params);
    } else {
      tree = grow_tree(*shared, targets, params);
    }

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      running[i] += tree.predict(features.row(i));
      const double err = running[i] / static_cast<double>(t + 1) - targets[i];
      sse += err * err;
    }
    trace.push_back(sse / static_cast<double>(n));
    model.trees.push_back(std::move(tree));
  }
  return FittedPredictor(std::move(model), features.cols(), std::move(trace));
}

}  // namespace detail
}  // namespace weaknas
