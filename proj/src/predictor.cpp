#include "weaknas/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "predictor_impl.hpp"
#include "weaknas/rng.hpp"

namespace weaknas {

using nlohmann::json;

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::Mlp:
      return "mlp";
    case PredictorKind::Gbrt:
      return "gbrt";
    case PredictorKind::RandomForest:
      return "forest";
  }
  return "unknown";
}

PredictorKind parse_predictor_kind(const std::string& text) {
  if (text == "mlp") return PredictorKind::Mlp;
  if (text == "gbrt") return PredictorKind::Gbrt;
  if (text == "forest" || text == "rf") return PredictorKind::RandomForest;
  throw std::invalid_argument("unknown predictor '" + text + "' (expected mlp, gbrt or forest)");
}

void PredictorConfig::validate() const {
  switch (kind) {
    case PredictorKind::Gbrt:
      if (gbrt.num_trees == 0) throw std::invalid_argument("gbrt needs at least one tree");
      if (!(gbrt.shrinkage > 0.0 && gbrt.shrinkage <= 1.0)) {
        throw std::invalid_argument("gbrt shrinkage must lie in (0, 1]");
      }
      if (gbrt.max_depth < 0) throw std::invalid_argument("tree depth must be non-negative");
      if (gbrt.min_leaf == 0) throw std::invalid_argument("min_leaf must be positive");
      break;
    case PredictorKind::RandomForest:
      if (forest.num_trees == 0) throw std::invalid_argument("forest needs at least one tree");
      if (!(forest.feature_fraction > 0.0 && forest.feature_fraction <= 1.0)) {
        throw std::invalid_argument("feature_fraction must lie in (0, 1]");
      }
      if (forest.max_depth < 0) throw std::invalid_argument("tree depth must be non-negative");
      if (forest.min_leaf == 0) throw std::invalid_argument("min_leaf must be positive");
      break;
    case PredictorKind::Mlp:
      if (mlp.epochs <= 0) throw std::invalid_argument("mlp epochs must be positive");
      if (mlp.batch_size == 0) throw std::invalid_argument("mlp batch size must be positive");
      if (!(mlp.step_size > 0.0)) throw std::invalid_argument("mlp step size must be positive");
      for (std::size_t h : mlp.hidden) {
        if (h == 0) throw std::invalid_argument("mlp hidden widths must be positive");
      }
      break;
  }
}

double MlpModel::predict(std::span<const double> x) const {
  if (target_scale == 0.0) return target_offset;
  return target_offset + target_scale * net.forward(x);
}

FittedPredictor::FittedPredictor(Model model, std::size_t feature_length, std::vector<double> loss_trace)
    : model_(std::move(model)), feature_length_(feature_length), loss_trace_(std::move(loss_trace)) {}

PredictorKind FittedPredictor::kind() const {
  switch (model_.index()) {
    case 0:
      return PredictorKind::Mlp;
    case 1:
      return PredictorKind::Gbrt;
    default:
      return PredictorKind::RandomForest;
  }
}

double FittedPredictor::predict(std::span<const double> features) const {
  if (features.size() != feature_length_) {
    throw std::invalid_argument("feature length " + std::to_string(features.size()) + " does not match predictor (" +
                                std::to_string(feature_length_) + ")");
  }
  return std::visit([&](const auto& m) { return m.predict(features); }, model_);
}

std::vector<double> FittedPredictor::predict(const FeatureMatrix& features) const {
  std::vector<double> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict(features.row(r));
  return out;
}

std::vector<double> FittedPredictor::predict(std::span<const FeatureVector> features) const {
  std::vector<double> out;
  out.reserve(features.size());
  for (const FeatureVector& f : features) out.push_back(predict(std::span<const double>(f.values)));
  return out;
}

namespace {

json tree_to_json(const RegressionTree& tree, std::uint32_t node = 0) {
  const TreeNode& n = tree.nodes()[node];
  if (n.feature < 0) return json{{"value", n.value}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"left", tree_to_json(tree, n.left)},
              {"right", tree_to_json(tree, n.right)}};
}

std::uint32_t tree_from_json(const json& j, std::vector<TreeNode>& nodes) {
  const auto id = static_cast<std::uint32_t>(nodes.size());
  nodes.emplace_back();
  if (j.contains("value")) {
    nodes[id].value = j.at("value").get<double>();
    return id;
  }
  nodes[id].feature = j.at("feature").get<std::int32_t>();
  nodes[id].threshold = j.at("threshold").get<double>();
  const std::uint32_t left = tree_from_json(j.at("left"), nodes);
  const std::uint32_t right = tree_from_json(j.at("right"), nodes);
  nodes[id].left = left;
  nodes[id].right = right;
  return id;
}

json trees_to_json(const std::vector<RegressionTree>& trees) {
  json out = json::array();
  for (const RegressionTree& t : trees) out.push_back(tree_to_json(t));
  return out;
}

std::vector<RegressionTree> trees_from_json(const json& j) {
  std::vector<RegressionTree> trees;
  for (const json& t : j) {
    std::vector<TreeNode> nodes;
    tree_from_json(t, nodes);
    trees.emplace_back(std::move(nodes));
  }
  return trees;
}

void check_finite(const FeatureMatrix& features, std::span<const double> targets) {
  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (double v : features.row(r)) {
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature in training row " + std::to_string(r));
    }
    if (!std::isfinite(targets[r])) throw std::invalid_argument("non-finite target in training row " + std::to_string(r));
  }
}

}  // namespace

std::string FittedPredictor::to_json() const {
  json j;
  j["kind"] = to_string(kind());
  j["feature_length"] = feature_length_;
  j["loss_trace"] = loss_trace_;
  if (const auto* m = std::get_if<GbrtModel>(&model_)) {
    j["base"] = m->base;
    j["shrinkage"] = m->shrinkage;
    j["trees"] = trees_to_json(m->trees);
  } else if (const auto* f = std::get_if<ForestModel>(&model_)) {
    j["trees"] = trees_to_json(f->trees);
  } else {
    const auto& mm = std::get<MlpModel>(model_);
    const auto& sizes = mm.net.layer_sizes();
    j["layer_sizes"] = sizes;
    j["activation"] = mm.net.activation() == Activation::Relu ? "relu" : "linear";
    j["target_offset"] = mm.target_offset;
    j["target_scale"] = mm.target_scale;
    const auto params = mm.net.parameters();
    j["parameters"] = std::vector<double>(params.begin(), params.end());
  }
  return j.dump();
}

FittedPredictor FittedPredictor::from_json(const std::string& text) {
  const json j = json::parse(text);
  const PredictorKind kind = parse_predictor_kind(j.at("kind").get<std::string>());
  const auto length = j.at("feature_length").get<std::size_t>();
  auto trace = j.at("loss_trace").get<std::vector<double>>();
  switch (kind) {
    case PredictorKind::Gbrt: {
      GbrtModel m;
      m.base = j.at("base").get<double>();
      m.shrinkage = j.at("shrinkage").get<double>();
      m.trees = trees_from_json(j.at("trees"));
      return FittedPredictor(std::move(m), length, std::move(trace));
    }
    case PredictorKind::RandomForest: {
      ForestModel m;
      m.trees = trees_from_json(j.at("trees"));
      return FittedPredictor(std::move(m), length, std::move(trace));
    }
    case PredictorKind::Mlp:
      break;
  }
  const auto sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
  if (sizes.size() < 2 || sizes.front() != length || sizes.back() != 1) {
    throw std::invalid_argument("inconsistent MLP layer sizes");
  }
  const Activation act = j.at("activation").get<std::string>() == "relu" ? Activation::Relu : Activation::Linear;
  MlpModel m{Mlp(sizes.front(), std::vector<std::size_t>(sizes.begin() + 1, sizes.end() - 1), act, 0, 0.0),
             j.at("target_offset").get<double>(), j.at("target_scale").get<double>()};
  const auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != m.net.parameter_count()) throw std::invalid_argument("MLP parameter count mismatch");
  std::copy(params.begin(), params.end(), m.net.parameters().begin());
  return FittedPredictor(std::move(m), length, std::move(trace));
}

namespace detail {

FittedPredictor fit_mlp(const FeatureMatrix& features, std::span<const double> targets, const PredictorConfig& config) {
  const MlpConfig& cfg = config.mlp;
  const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
  MlpModel model{Mlp(features.cols(), cfg.hidden, cfg.activation, derive_seed(config.seed, 0), cfg.init_scale), *lo,
                 *hi - *lo};
  if (model.target_scale == 0.0) {
    return FittedPredictor(std::move(model), features.cols(), std::vector<double>(1, 0.0));
  }
  std::vector<double> scaled(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) scaled[i] = (targets[i] - model.target_offset) / model.target_scale;
  auto trace = model.net.train(features, scaled, cfg, derive_seed(config.seed, 1));
  return FittedPredictor(std::move(model), features.cols(), std::move(trace));
}

}  // namespace detail

FittedPredictor fit(const FeatureMatrix& features, std::span<const double> targets, const PredictorConfig& config) {
  config.validate();
  if (features.rows() != targets.size()) throw std::invalid_argument("feature and target counts differ");
  if (features.rows() < 2) throw std::invalid_argument("need at least two training pairs");
  if (features.cols() == 0) throw std::invalid_argument("empty feature vectors");
  check_finite(features, targets);
  switch (config.kind) {
    case PredictorKind::Gbrt:
      return detail::fit_gbrt(features, targets, config);
    case PredictorKind::RandomForest:
      return detail::fit_forest(features, targets, config);
    case PredictorKind::Mlp:
      break;
  }
  return detail::fit_mlp(features, targets, config);
}

FittedPredictor fit(std::span<const TrainingPair> pairs, const PredictorConfig& config) {
  if (pairs.size() < 2) throw std::invalid_argument("need at least two training pairs");
  const std::size_t length = pairs.front().features.size();
  FeatureMatrix features;
  std::vector<double> targets;
  targets.reserve(pairs.size());
  for (const TrainingPair& p : pairs) {
    if (p.features.size() != length) throw std::invalid_argument("inconsistent feature lengths");
    features.append_row(p.features.values);
    targets.push_back(p.target);
  }
  return fit(features, targets, config);
}

std::vector<double> predict(const FittedPredictor& model, std::span<const FeatureVector> features) {
  return model.predict(features);
}

namespace {

// On/off state of every hidden ReLU for every row.
std::vector<char> relu_pattern(const Mlp& net, const FeatureMatrix& features) {
  std::vector<char> pattern;
  if (net.activation() != Activation::Relu) return pattern;
  const auto& sizes = net.layer_sizes();
  const auto params = net.parameters();
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto row = features.row(r);
    std::vector<double> h(row.begin(), row.end());
    std::size_t offset = 0;
    for (std::size_t l = 1; l + 1 < sizes.size(); ++l) {
      const std::size_t bias = offset + sizes[l - 1] * sizes[l];
      std::vector<double> next(sizes[l]);
      for (std::size_t i = 0; i < sizes[l]; ++i) {
        double z = params[bias + i];
        for (std::size_t j = 0; j < h.size(); ++j) z += params[offset + i * sizes[l - 1] + j] * h[j];
        pattern.push_back(z > 0.0);
        next[i] = std::max(z, 0.0);
      }
      h = std::move(next);
      offset = bias + sizes[l];
    }
  }
  return pattern;
}

}  // namespace

double mlp_gradient_check(const PredictorConfig& config, std::span<const TrainingPair> probe_pairs) {
  constexpr double kStep = 1e-5;
  constexpr double kFloor = 1e-6;
  constexpr double kBiasJitter = 0.1;
  if (probe_pairs.empty()) throw std::invalid_argument("gradient check needs at least one pair");
  FeatureMatrix features;
  std::vector<double> targets;
  for (const TrainingPair& p : probe_pairs) {
    features.append_row(p.features.values);
    targets.push_back(p.target);
  }
  std::vector<std::uint32_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), std::uint32_t{0});

  Mlp net(features.cols(), config.mlp.hidden, config.mlp.activation, config.seed, config.mlp.init_scale);
  auto params = net.parameters();
  // Nonzero biases keep pre-activations off the ReLU kink.
  Rng bias_rng(derive_seed(config.seed, 2));
  const auto& sizes = net.layer_sizes();
  std::size_t offset = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    offset += sizes[l - 1] * sizes[l];
    for (std::size_t j = 0; j < sizes[l]; ++j) {
      params[offset + j] = kBiasJitter * config.mlp.init_scale * bias_rng.uniform(-1.0, 1.0);
    }
    offset += sizes[l];
  }
  std::vector<double> grad(net.parameter_count());
  net.loss_and_gradient(features, targets, rows, grad);

  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + kStep;
    const double up = net.loss(features, targets, rows);
    const std::vector<char> up_pattern = relu_pattern(net, features);
    params[k] = saved - kStep;
    const double down = net.loss(features, targets, rows);
    const bool straddles = relu_pattern(net, features) != up_pattern;
    params[k] = saved;
    if (straddles) continue;
    const double numeric = (up - down) / (2.0 * kStep);
    const double denom = std::max({std::abs(grad[k]), std::abs(numeric), kFloor});
    worst = std::max(worst, std::abs(grad[k] - numeric) / denom);
  }
  return worst;
}

}  // namespace weaknas
