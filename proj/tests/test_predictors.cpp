#include <cmath>
#include <numeric>

#include "doctest.h"
#include "weaknas/predictor.hpp"
#include "weaknas/rng.hpp"

using namespace weaknas;

namespace {

PredictorConfig small_config(PredictorKind kind, std::uint64_t seed = 1) {
  PredictorConfig c;
  c.kind = kind;
  c.seed = seed;
  c.gbrt.num_trees = 50;
  c.forest.num_trees = 20;
  c.mlp.hidden = {8, 8};
  c.mlp.epochs = 30;
  return c;
}

std::vector<TrainingPair> random_pairs(Rng& rng, std::size_t n, std::size_t dim, bool binary) {
  std::vector<TrainingPair> pairs(n);
  for (TrainingPair& p : pairs) {
    p.features.values.resize(dim);
    for (double& v : p.features.values) v = binary ? static_cast<double>(rng.uniform_index(2)) : rng.uniform(-1, 1);
    p.target = 50.0 + 40.0 * rng.uniform01();
  }
  return pairs;
}

std::vector<FeatureVector> features_of(const std::vector<TrainingPair>& pairs) {
  std::vector<FeatureVector> out;
  for (const TrainingPair& p : pairs) out.push_back(p.features);
  return out;
}

constexpr PredictorKind kAllKinds[] = {PredictorKind::Gbrt, PredictorKind::RandomForest, PredictorKind::Mlp};

}  // namespace

TEST_CASE("constant targets give a constant predictor") {
  Rng rng(1);
  auto pairs = random_pairs(rng, 12, 6, true);
  for (auto& p : pairs) p.target = 73.25;
  const auto probes = random_pairs(rng, 20, 6, true);
  for (PredictorKind kind : kAllKinds) {
    CAPTURE(to_string(kind));
    const FittedPredictor m = fit(pairs, small_config(kind));
    for (const TrainingPair& p : probes) CHECK(std::abs(m.predict(std::span<const double>(p.features.values)) - 73.25) < 1e-6);
  }
}

TEST_CASE("two pairs are enough") {
  Rng rng(2);
  const auto pairs = random_pairs(rng, 2, 5, true);
  for (PredictorKind kind : kAllKinds) CHECK_NOTHROW(fit(pairs, small_config(kind)));
  CHECK_THROWS_AS(fit(std::span<const TrainingPair>(pairs.data(), 1), small_config(PredictorKind::Gbrt)),
                  std::invalid_argument);
}

TEST_CASE("GBRT with shrinkage 1 interpolates eight distinct points") {
  std::vector<TrainingPair> pairs;
  for (int i = 0; i < 8; ++i) {
    pairs.push_back({FeatureVector{{double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)}}, 10.0 * i + 3.0 * (i % 3)});
  }
  PredictorConfig c = small_config(PredictorKind::Gbrt);
  c.gbrt.shrinkage = 1.0;
  c.gbrt.max_depth = 3;
  c.gbrt.num_trees = 20;
  const FittedPredictor m = fit(pairs, c);
  double mse = 0.0;
  for (const TrainingPair& p : pairs) {
    const double e = m.predict(std::span<const double>(p.features.values)) - p.target;
    mse += e * e / 8.0;
  }
  CHECK(mse < 1e-8);
}

TEST_CASE("same data and seed give identical predictions") {
  Rng rng(3);
  const auto pairs = random_pairs(rng, 40, 10, true);
  const auto probes = features_of(random_pairs(rng, 30, 10, true));
  for (PredictorKind kind : kAllKinds) {
    CAPTURE(to_string(kind));
    CHECK(fit(pairs, small_config(kind, 9)).predict(probes) == fit(pairs, small_config(kind, 9)).predict(probes));
  }
}

TEST_CASE("batch prediction equals element-wise calls, and lengths are checked") {
  Rng rng(4);
  const auto pairs = random_pairs(rng, 30, 7, false);
  const auto probes = features_of(random_pairs(rng, 10, 7, false));
  for (PredictorKind kind : kAllKinds) {
    const FittedPredictor m = fit(pairs, small_config(kind));
    const auto batch = predict(m, probes);
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(batch[i] == m.predict(std::span<const double>(probes[i].values)));
    const std::vector<double> wrong(6, 0.0);
    CHECK_THROWS_AS(m.predict(std::span<const double>(wrong)), std::invalid_argument);
  }
}

TEST_CASE("non-finite features are rejected") {
  Rng rng(5);
  auto pairs = random_pairs(rng, 5, 3, false);
  pairs[2].features.values[1] = std::nan("");
  for (PredictorKind kind : kAllKinds) CHECK_THROWS_AS(fit(pairs, small_config(kind)), std::invalid_argument);
}

TEST_CASE("forest prediction is exactly the mean of its trees") {
  Rng rng(6);
  const auto pairs = random_pairs(rng, 60, 12, true);
  const FittedPredictor m = fit(pairs, small_config(PredictorKind::RandomForest));
  const auto& forest = std::get<ForestModel>(m.model());
  REQUIRE(forest.trees.size() == 20);
  for (const FeatureVector& f : features_of(random_pairs(rng, 50, 12, true))) {
    double sum = 0.0;
    for (const RegressionTree& t : forest.trees) sum += t.predict(f.values);
    CHECK(m.predict(std::span<const double>(f.values)) == sum / 20.0);
  }
}

TEST_CASE("GBRT prediction is exactly base + shrinkage * sum of trees") {
  Rng rng(7);
  const auto pairs = random_pairs(rng, 60, 12, true);
  const FittedPredictor m = fit(pairs, small_config(PredictorKind::Gbrt));
  const auto& g = std::get<GbrtModel>(m.model());
  double mean = 0.0;
  for (const TrainingPair& p : pairs) mean += p.target;
  CHECK(g.base == doctest::Approx(mean / 60.0).epsilon(1e-14));
  for (const FeatureVector& f : features_of(random_pairs(rng, 50, 12, true))) {
    double sum = 0.0;
    for (const RegressionTree& t : g.trees) sum += t.predict(f.values);
    CHECK(m.predict(std::span<const double>(f.values)) == g.base + g.shrinkage * sum);
  }
}

TEST_CASE("GBRT training loss never increases across rounds") {
  Rng rng(8);
  for (int d = 0; d < 100; ++d) {
    const auto pairs = random_pairs(rng, 5 + rng.uniform_index(40), 1 + rng.uniform_index(8), d % 2 == 0);
    PredictorConfig c = small_config(PredictorKind::Gbrt, d);
    c.gbrt.num_trees = 30;
    c.gbrt.max_depth = 1 + static_cast<int>(rng.uniform_index(6));
    c.gbrt.shrinkage = 0.05 + 0.95 * rng.uniform01();
    const auto trace = fit(pairs, c).loss_trace();
    REQUIRE(trace.size() == 30);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] * (1.0 + 1e-12) + 1e-18);
  }
}

TEST_CASE("forest without bootstrap or feature sampling equals a single tree") {
  Rng rng(9);
  const auto pairs = random_pairs(rng, 40, 9, true);
  PredictorConfig c = small_config(PredictorKind::RandomForest);
  c.forest.bootstrap = false;
  c.forest.feature_fraction = 1.0;
  const FittedPredictor many = fit(pairs, c);
  c.forest.num_trees = 1;
  const FittedPredictor one = fit(pairs, c);
  const auto& trees = std::get<ForestModel>(many.model()).trees;
  for (const RegressionTree& t : trees) CHECK(t.nodes().size() == trees.front().nodes().size());
  const auto probes = features_of(random_pairs(rng, 40, 9, true));
  const auto a = many.predict(probes);
  const auto b = one.predict(probes);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("tree ensembles are equivariant to a label shift") {
  Rng rng(10);
  auto pairs = random_pairs(rng, 50, 8, true);
  auto shifted = pairs;
  for (TrainingPair& p : shifted) p.target += 7.5;
  const auto probes = features_of(random_pairs(rng, 30, 8, true));
  for (PredictorKind kind : {PredictorKind::Gbrt, PredictorKind::RandomForest}) {
    const auto a = fit(pairs, small_config(kind)).predict(probes);
    const auto b = fit(shifted, small_config(kind)).predict(probes);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i] + 7.5).epsilon(1e-12));
  }
}

TEST_CASE("duplicated training pairs leave a grown tree's training predictions unchanged") {
  Rng rng(11);
  const auto pairs = random_pairs(rng, 25, 10, false);
  auto doubled = pairs;
  doubled.insert(doubled.end(), pairs.begin(), pairs.end());
  PredictorConfig c = small_config(PredictorKind::RandomForest);
  c.forest.bootstrap = false;
  c.forest.feature_fraction = 1.0;
  c.forest.num_trees = 1;
  const auto a = fit(pairs, c).predict(features_of(pairs));
  const auto b = fit(doubled, c).predict(features_of(pairs));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i] == pairs[i].target);
  }
}

TEST_CASE("tree split ties go to the lowest feature") {
  FeatureMatrix x;
  std::vector<double> y;
  for (int i = 0; i < 6; ++i) {
    const double v = i < 3 ? 0.0 : 1.0;
    x.append_row(std::vector<double>{v, v});
    y.push_back(v * 10.0);
  }
  std::vector<std::uint32_t> rows(6);
  std::iota(rows.begin(), rows.end(), 0u);
  const PresortedColumns cols(x, rows);
  const RegressionTree t = grow_tree(cols, y, TreeParams{});
  REQUIRE(t.nodes().size() == 3);
  CHECK(t.nodes()[0].feature == 0);
  CHECK(t.nodes()[0].threshold == 0.5);
}

TEST_CASE("gradient check: zero network with zero targets") {
  PredictorConfig c;
  c.kind = PredictorKind::Mlp;
  c.mlp.hidden = {8, 8};
  c.mlp.init_scale = 0.0;
  std::vector<TrainingPair> pairs;
  Rng rng(12);
  for (auto p : random_pairs(rng, 5, 4, false)) {
    p.target = 0.0;
    pairs.push_back(p);
  }
  FeatureMatrix x = FeatureMatrix::from_vectors(features_of(pairs));
  std::vector<double> y(pairs.size(), 0.0);
  std::vector<std::uint32_t> rows(pairs.size());
  std::iota(rows.begin(), rows.end(), 0u);
  Mlp net(4, {8, 8}, Activation::Relu, 0, 0.0);
  std::vector<double> grad(net.parameter_count());
  CHECK(net.loss_and_gradient(x, y, rows, grad) == 0.0);
  for (double g : grad) CHECK(g == 0.0);
  CHECK(mlp_gradient_check(c, pairs) == 0.0);
}

TEST_CASE("gradient check on random small networks") {
  Rng rng(13);
  for (int t = 0; t < 10; ++t) {
    PredictorConfig c;
    c.kind = PredictorKind::Mlp;
    c.mlp.hidden = {8, 8};
    c.seed = 100 + t;
    auto pairs = random_pairs(rng, 1 + rng.uniform_index(20), 5, false);
    for (auto& p : pairs) p.target = rng.uniform(-1, 1);
    CHECK(mlp_gradient_check(c, pairs) < 1e-4);
  }
}

TEST_CASE("linear network gradient matches the least-squares closed form") {
  Rng rng(14);
  const std::size_t n = 9;
  const std::size_t d = 4;
  const auto pairs = random_pairs(rng, n, d, false);
  FeatureMatrix x = FeatureMatrix::from_vectors(features_of(pairs));
  std::vector<double> y;
  for (const auto& p : pairs) y.push_back(p.target / 100.0);
  std::vector<std::uint32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0u);
  Mlp net(d, {}, Activation::Linear, 3);
  const auto w = net.parameters();  // d weights then the bias
  std::vector<double> grad(net.parameter_count());
  net.loss_and_gradient(x, y, rows, grad);

  std::vector<double> expect(d + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double r = w[d];
    for (std::size_t k = 0; k < d; ++k) r += x(i, k) * w[k];
    r -= y[i];
    for (std::size_t k = 0; k < d; ++k) expect[k] += 2.0 / n * x(i, k) * r;
    expect[d] += 2.0 / n * r;
  }
  for (std::size_t k = 0; k <= d; ++k) CHECK(grad[k] == doctest::Approx(expect[k]).epsilon(1e-12));
}

TEST_CASE("MLP training reduces the loss") {
  Rng rng(15);
  const auto pairs = random_pairs(rng, 64, 6, true);
  PredictorConfig c = small_config(PredictorKind::Mlp);
  c.mlp.epochs = 100;
  const auto trace = fit(pairs, c).loss_trace();
  REQUIRE(trace.size() == 100);
  CHECK(trace.back() < 0.5 * trace.front());
}

TEST_CASE("JSON dump round-trips every predictor kind") {
  Rng rng(16);
  const auto pairs = random_pairs(rng, 30, 6, true);
  const auto probes = features_of(random_pairs(rng, 20, 6, true));
  for (PredictorKind kind : kAllKinds) {
    const FittedPredictor m = fit(pairs, small_config(kind));
    const FittedPredictor back = FittedPredictor::from_json(m.to_json());
    CHECK(back.kind() == kind);
    CHECK(back.predict(probes) == m.predict(probes));
    CHECK(back.loss_trace() == m.loss_trace());
  }
}

TEST_CASE("config validation") {
  PredictorConfig c;
  c.gbrt.shrinkage = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = PredictorConfig{};
  c.kind = PredictorKind::RandomForest;
  c.forest.feature_fraction = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = PredictorConfig{};
  c.gbrt.num_trees = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_predictor_kind("forest") == PredictorKind::RandomForest);
  CHECK_THROWS_AS(parse_predictor_kind("svm"), std::invalid_argument);
}
