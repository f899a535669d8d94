#pragma once
// CART regression trees with exact greedy split search over presorted
// feature columns (squared-error criterion).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weaknas/encoding.hpp"

namespace weaknas {

struct TreeNode {
  // -1 for leaves.
  std::int32_t feature = -1;
  double threshold = 0.0;  // go left iff x[feature] <= threshold
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;  // leaf prediction (mean target)
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> features) const {
    std::uint32_t i = 0;
    while (nodes_[i].feature >= 0) {
      const TreeNode& n = nodes_[i];
      i = features[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t leaf_count() const;
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  int max_depth = 6;  // 0 means unlimited
  std::size_t min_leaf = 1;
  double feature_fraction = 1.0;  // features examined per node
  std::uint64_t seed = 0;         // used only when feature_fraction < 1
};

/// Training rows (possibly repeated, e.g. a bootstrap draw) with every
/// feature column sorted once. Reusable across trees grown on the same rows.
class PresortedColumns {
 public:
  PresortedColumns(const FeatureMatrix& features, std::vector<std::uint32_t> rows);

  const FeatureMatrix& features() const { return *features_; }
  const std::vector<std::uint32_t>& rows() const { return rows_; }
  /// order(f)[k] is a position into rows(); values non-decreasing in k.
  const std::vector<std::uint32_t>& order(std::size_t feature) const { return orders_[feature]; }

 private:
  const FeatureMatrix* features_;
  std::vector<std::uint32_t> rows_;
  std::vector<std::vector<std::uint32_t>> orders_;
};

/// Grows one tree. targets[k] is the target of position k (rows()[k]).
/// Ties between equally good splits go to the lowest feature index, then the
/// lowest threshold. A node with no admissible split becomes a leaf.
RegressionTree grow_tree(const PresortedColumns& columns, std::span<const double> targets, const TreeParams& params);

}  // namespace weaknas
