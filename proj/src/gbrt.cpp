#include <numeric>

#include "predictor_impl.hpp"

namespace weaknas {

double GbrtModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const RegressionTree& t : trees) sum += t.predict(x);
  return base + shrinkage * sum;
}

namespace detail {

FittedPredictor fit_gbrt(const FeatureMatrix& features, std::span<const double> targets, const PredictorConfig& config) {
  const GbrtConfig& cfg = config.gbrt;
  const std::size_t n = features.rows();

  GbrtModel model;
  model.shrinkage = cfg.shrinkage;
  model.base = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(n);

  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::uint32_t{0});
  const PresortedColumns columns(features, rows);

  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = targets[i] - model.base;

  TreeParams params;
  params.max_depth = cfg.max_depth;
  params.min_leaf = cfg.min_leaf;
  params.feature_fraction = 1.0;
  params.seed = config.seed;

  std::vector<double> trace;
  trace.reserve(cfg.num_trees);
  model.trees.reserve(cfg.num_trees);
  for (std::size_t round = 0; round < cfg.num_trees; ++round) {
    RegressionTree tree = grow_tree(columns, residual, params);
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] -= cfg.shrinkage * tree.predict(features.row(i));
      sse += residual[i] * residual[i];
    }
    trace.push_back(sse / static_cast<double>(n));
    model.trees.push_back(std::move(tree));
  }
  return FittedPredictor(std::move(model), features.cols(), std::move(trace));
}

}  // namespace detail
}  // namespace weaknas
