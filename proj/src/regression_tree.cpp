#include "weaknas/regression_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "weaknas/rng.hpp"

namespace weaknas {

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[nodes_[i].left] = d[i] + 1;
      d[nodes_[i].right] = d[i] + 1;
    }
  }
  return best;
}

PresortedColumns::PresortedColumns(const FeatureMatrix& features, std::vector<std::uint32_t> rows)
    : features_(&features), rows_(std::move(rows)) {
  const std::size_t cols = features.cols();
  orders_.resize(cols);
  for (std::size_t f = 0; f < cols; ++f) {
    auto& order = orders_[f];
    order.resize(rows_.size());
    std::iota(order.begin(), order.end(), std::uint32_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return features(rows_[a], f) < features(rows_[b], f);
    });
  }
}

namespace {

struct SplitChoice {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const PresortedColumns& columns, std::span<const double> targets, const TreeParams& params)
      : columns_(columns),
        targets_(targets),
        params_(params),
        rng_(params.seed),
        goes_left_(targets.size(), 0),
        scratch_(targets.size()) {
    orders_.reserve(columns.features().cols());
    for (std::size_t f = 0; f < columns.features().cols(); ++f) orders_.push_back(columns.order(f));
    all_features_.resize(columns.features().cols());
    std::iota(all_features_.begin(), all_features_.end(), std::uint32_t{0});
  }

  RegressionTree build() {
    nodes_.clear();
    nodes_.emplace_back();
    grow(0, 0, targets_.size(), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  double value(std::uint32_t pos, std::size_t feature) const {
    return columns_.features()(columns_.rows()[pos], feature);
  }

  void grow(std::size_t node, std::size_t begin, std::size_t end, int depth) {
    const std::size_t n = end - begin;
    // Node statistics in feature-0 order.
    const auto& any_order = orders_[0];
    double sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) sum += targets_[any_order[k]];
    const double mean = sum / static_cast<double>(n);
    nodes_[node].value = mean;

    const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
    if (!depth_ok || n < 2 * std::max<std::size_t>(params_.min_leaf, 1)) return;

    double sse = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const double r = targets_[any_order[k]] - mean;
      sse += r * r;
    }
    if (sse <= 1e-24 * static_cast<double>(n) * std::max(1.0, mean * mean)) return;

    const SplitChoice split = best_split(begin, end, mean, sse);
    if (split.feature < 0) return;

    // Partition every column's order stably: left block first.
    const auto& split_order = orders_[static_cast<std::size_t>(split.feature)];
    std::size_t left_count = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t pos = split_order[k];
      const bool left = value(pos, static_cast<std::size_t>(split.feature)) <= split.threshold;
      goes_left_[pos] = left ? 1 : 0;
      left_count += left ? 1 : 0;
    }
    for (auto& order : orders_) {
      std::size_t l = begin;
      std::size_t r = 0;
      for (std::size_t k = begin; k < end; ++k) {
        const std::uint32_t pos = order[k];
        if (goes_left_[pos]) {
          order[l++] = pos;
        } else {
          scratch_[r++] = pos;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r), order.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const auto left_id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    const auto right_id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_[node].feature = split.feature;
    nodes_[node].threshold = split.threshold;
    nodes_[node].left = left_id;
    nodes_[node].right = right_id;
    grow(left_id, begin, begin + left_count, depth + 1);
    grow(right_id, begin + left_count, end, depth + 1);
  }

  std::vector<std::uint32_t> candidate_features() {
    const std::size_t total = all_features_.size();
    if (params_.feature_fraction >= 1.0) return all_features_;
    const auto k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params_.feature_fraction * static_cast<double>(total))));
    std::vector<std::uint32_t> chosen = rng_.sample_without_replacement(static_cast<std::uint32_t>(total),
                                                                        static_cast<std::uint32_t>(std::min(k, total)));
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  static constexpr double kTieTolerance = 1e-9;

  SplitChoice best_split(std::size_t begin, std::size_t end, double mean, double sse) {
    SplitChoice best;
    const std::size_t n = end - begin;
    const std::size_t min_leaf = std::max<std::size_t>(params_.min_leaf, 1);
    const double min_gain = 1e-12 * sse;
    for (std::uint32_t f : candidate_features()) {
      const auto& order = orders_[f];
      double left_sum = 0.0;  // of centered targets
      for (std::size_t k = begin; k + 1 < end; ++k) {
        const std::uint32_t pos = order[k];
        left_sum += targets_[pos] - mean;
        const std::size_t n_left = k - begin + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        const double v = value(pos, f);
        const double v_next = value(order[k + 1], f);
        if (!(v < v_next)) continue;
        // Centered right sum is -left_sum.
        const double gain = left_sum * left_sum * static_cast<double>(n) /
                            (static_cast<double>(n_left) * static_cast<double>(n_right));
        // Gains within rounding of the incumbent count as ties.
        if (gain > min_gain && gain > best.gain * (1.0 + kTieTolerance)) {
          double threshold = v + (v_next - v) / 2.0;
          if (!(threshold < v_next)) threshold = v;
          best = {static_cast<std::int32_t>(f), threshold, gain};
        }
      }
    }
    return best;
  }

  const PresortedColumns& columns_;
  std::span<const double> targets_;
  TreeParams params_;
  Rng rng_;
  std::vector<std::vector<std::uint32_t>> orders_;
  std::vector<std::uint32_t> all_features_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree grow_tree(const PresortedColumns& columns, std::span<const double> targets, const TreeParams& params) {
  if (targets.size() != columns.rows().size()) throw std::invalid_argument("grow_tree: target count mismatch");
  if (targets.empty()) throw std::invalid_argument("grow_tree: no training rows");
  if (columns.features().cols() == 0) throw std::invalid_argument("grow_tree: no feature columns");
  TreeBuilder builder(columns, targets, params);
  return builder.build();
}

}  // namespace weaknas
