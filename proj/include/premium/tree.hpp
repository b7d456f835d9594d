#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "premium/io.hpp"
#include "premium/matrix.hpp"
#include "premium/rng.hpp"

namespace premium {

struct TreeConfig {
  std::optional<std::size_t> max_depth;     // nullopt: unbounded
  std::size_t min_samples_split = 2;
  std::optional<std::size_t> max_features;  // nullopt: all features
  double min_gain = 0.0;

  friend bool operator==(const TreeConfig&, const TreeConfig&) = default;
};

Json tree_config_to_json(const TreeConfig& config);
TreeConfig tree_config_from_json(const Json& doc);

// Flat pre-order node. Leaves have feature == kLeaf.
struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // row goes left iff x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
  std::size_t count = 0;

  bool is_leaf() const noexcept { return feature == kLeaf; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, std::size_t feature_count,
                 TreeConfig config);

  double predict(std::span<const double> row) const;
  // No size check; row must hold feature_count() values.
  double predict_unchecked(const double* row) const noexcept {
    const TreeNode* node = &nodes_[0];
    while (!node->is_leaf()) {
      node = &nodes_[row[node->feature] <= node->threshold ? node->left
                                                           : node->right];
    }
    return node->value;
  }

  std::size_t feature_count() const noexcept { return feature_count_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t leaf_count() const noexcept;
  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeConfig& config() const noexcept { return config_; }

  // Nested node-tree document: internal {feature, threshold, left, right},
  // leaf {value, count}.
  Json to_json() const;
  static RegressionTree from_json(const Json& doc, std::size_t feature_count,
                                  TreeConfig config = {});

  friend bool operator==(const RegressionTree&,
                         const RegressionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t feature_count_ = 0;
  TreeConfig config_;
  std::size_t depth_ = 0;
};

// CART on squared error: each split maximizes the reduction in within-node
// SSE; leaves hold the mean target. `rows` selects (possibly repeated)
// training rows of x; the overload without it uses every row.
RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        const TreeConfig& config, RandomStream& stream);
RegressionTree fit_tree(const Matrix& x, std::span<const double> targets,
                        std::span<const std::size_t> rows,
                        const TreeConfig& config, RandomStream& stream);

// Penalties of the regularized second-order objective.
struct NewtonPenalty {
  double lambda = 1.0;  // L2 on leaf weights
  double gamma = 0.0;   // cost per additional leaf

  friend bool operator==(const NewtonPenalty&, const NewtonPenalty&) = default;
};

// Tree grown from per-row gradient/hessian pairs. Split gain is
// 0.5 * [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma and leaves hold
// -G/(H+l).
RegressionTree fit_tree_newton(const Matrix& x,
                               std::span<const double> gradients,
                               std::span<const double> hessians,
                               std::span<const std::size_t> rows,
                               const TreeConfig& config,
                               const NewtonPenalty& penalty,
                               RandomStream& stream);

}  // namespace premium
