#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "oracles.hpp"
#include "premium/error.hpp"
#include "premium/tree.hpp"

namespace premium {
namespace {

double sse_of_children(const RegressionTree& tree, const Matrix& x,
                       std::span<const double> y) {
  double sse = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double d = y[i] - tree.predict(x.row(i));
    sse += d * d;
  }
  return sse;
}

TEST(FitTree, SingleFeatureHandExample) {
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}, {4}});
  const std::vector<double> y = {1, 1, 3, 3};
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, TreeConfig{.max_depth = 1}, rng);
  const auto& root = tree.nodes()[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_DOUBLE_EQ(root.threshold, 2.5);
  const double lo = 2.0;
  const double hi = 3.0;
  EXPECT_DOUBLE_EQ(tree.predict(std::span(&lo, 1)), 1.0);
  EXPECT_DOUBLE_EQ(tree.predict(std::span(&hi, 1)), 3.0);
  EXPECT_EQ(tree.leaf_count(), 2u);
}

TEST(FitTree, ValueAtThresholdGoesLeft) {
  const Matrix x = Matrix::from_rows({{0}, {1}});
  const std::vector<double> y = {-5, 5};
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, {}, rng);
  const double t = tree.nodes()[0].threshold;
  EXPECT_DOUBLE_EQ(t, 0.5);
  EXPECT_DOUBLE_EQ(tree.predict(std::span(&t, 1)), -5.0);
  const double above = std::nextafter(t, 2.0);
  EXPECT_DOUBLE_EQ(tree.predict(std::span(&above, 1)), 5.0);
}

TEST(FitTree, DepthZeroIsTheMean) {
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}, {7}});
  const std::vector<double> y = {1, 2, 3, 10};
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, TreeConfig{.max_depth = 0}, rng);
  EXPECT_EQ(tree.nodes().size(), 1u);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].value, 4.0);
}

TEST(FitTree, ConstantTargetsGiveOneLeaf) {
  RandomStream data(3);
  const Matrix x = testing::uniform_matrix(30, 4, data);
  const std::vector<double> y(30, 7.5);
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, {}, rng);
  EXPECT_EQ(tree.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(tree.predict(x.row(4)), 7.5);
}

TEST(FitTree, IdenticalRowsCannotSplit) {
  const Matrix x = Matrix::from_rows({{1, 2}, {1, 2}, {1, 2}});
  const std::vector<double> y = {1, 2, 6};
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, {}, rng);
  EXPECT_EQ(tree.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].value, 3.0);
}

TEST(FitTree, RootSplitMatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    RandomStream data(seed);
    const std::size_t n = 10 + data.uniform_index(40);
    const std::size_t p = 1 + data.uniform_index(5);
    const Matrix x = testing::uniform_matrix(n, p, data);
    std::vector<double> y(n);
    for (auto& v : y) v = 10.0 * data.uniform01();
    RandomStream rng(seed);
    const auto tree = fit_tree(x, y, TreeConfig{.max_depth = 1}, rng);
    const auto brute = testing::brute_force_split(x, y);
    EXPECT_NEAR(sse_of_children(tree, x, y), brute.sse, 1e-9 * (1 + brute.sse))
        << "seed " << seed;
  }
}

TEST(FitTree, UnboundedTreeInterpolatesDistinctRows) {
  RandomStream data(11);
  const Matrix x = testing::uniform_matrix(50, 3, data);
  std::vector<double> y(50);
  for (auto& v : y) v = data.uniform01();
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, {}, rng);
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_DOUBLE_EQ(tree.predict(x.row(i)), y[i]);
}

TEST(FitTree, DepthAndMinSamplesAreRespected) {
  RandomStream data(5);
  const Matrix x = testing::uniform_matrix(200, 4, data);
  std::vector<double> y(200);
  for (auto& v : y) v = data.uniform01();
  for (std::size_t depth = 1; depth <= 5; ++depth) {
    RandomStream rng(1);
    const auto tree = fit_tree(x, y, TreeConfig{.max_depth = depth}, rng);
    EXPECT_LE(tree.depth(), depth);
    EXPECT_LE(tree.leaf_count(), std::size_t{1} << depth);
  }
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, TreeConfig{.min_samples_split = 50}, rng);
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf()) EXPECT_GE(node.count, 50u);
  }
}

TEST(FitTree, LeafValuesAreMeansAndCountsAddUp) {
  RandomStream data(8);
  const Matrix x = testing::uniform_matrix(64, 2, data);
  std::vector<double> y(64);
  for (auto& v : y) v = data.uniform01();
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, TreeConfig{.max_depth = 3}, rng);
  std::size_t total = 0;
  for (const auto& node : tree.nodes()) {
    if (!node.is_leaf()) {
      EXPECT_EQ(node.count, tree.nodes()[node.left].count + tree.nodes()[node.right].count);
      continue;
    }
    total += node.count;
    double sum = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (tree.predict(x.row(i)) == node.value) {
        sum += y[i];
        ++hits;
      }
    }
    EXPECT_EQ(hits, node.count);
    EXPECT_NEAR(sum / static_cast<double>(hits), node.value, 1e-12);
  }
  EXPECT_EQ(total, 64u);
}

TEST(FitTree, RepeatedRowsActAsWeights) {
  const Matrix x = Matrix::from_rows({{0}, {1}});
  const std::vector<double> y = {0, 8};
  const std::vector<std::size_t> rows = {0, 0, 0, 1};
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, rows, TreeConfig{.max_depth = 0}, rng);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].value, 2.0);
}

TEST(FitTree, FeatureSubsamplingIsSeeded) {
  RandomStream data(2);
  const Matrix x = testing::uniform_matrix(100, 6, data);
  std::vector<double> y(100);
  for (std::size_t i = 0; i < 100; ++i) y[i] = x(i, 0) + x(i, 3);
  const TreeConfig config{.max_depth = 4, .max_features = 2};
  RandomStream a(9);
  RandomStream b(9);
  EXPECT_EQ(fit_tree(x, y, config, a), fit_tree(x, y, config, b));
}

TEST(FitTree, InvalidInputs) {
  const Matrix x = Matrix::from_rows({{1}, {2}});
  const std::vector<double> y = {1, 2};
  RandomStream rng(1);
  EXPECT_THROW(fit_tree(x, y, TreeConfig{.min_samples_split = 1}, rng), ValidationError);
  EXPECT_THROW(fit_tree(x, y, TreeConfig{.max_features = 3}, rng), ValidationError);
  const std::vector<double> short_y = {1};
  EXPECT_THROW(fit_tree(x, short_y, {}, rng), ValidationError);
}

TEST(FitTree, PredictChecksWidth) {
  const Matrix x = Matrix::from_rows({{1, 1}, {2, 2}});
  const std::vector<double> y = {1, 2};
  RandomStream rng(1);
  const auto tree = fit_tree(x, y, {}, rng);
  const std::vector<double> narrow = {1};
  EXPECT_THROW(tree.predict(narrow), ValidationError);
}

TEST(TreeJson, RoundTripPreservesPredictions) {
  RandomStream data(4);
  const Matrix x = testing::uniform_matrix(80, 3, data);
  std::vector<double> y(80);
  for (auto& v : y) v = std::sin(7.0 * data.uniform01());
  RandomStream rng(1);
  const TreeConfig config{.max_depth = 5};
  const auto tree = fit_tree(x, y, config, rng);
  const auto back = RegressionTree::from_json(Json::parse(tree.to_json().dump()), 3, config);
  EXPECT_EQ(back, tree);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    EXPECT_EQ(back.predict(x.row(i)), tree.predict(x.row(i)));
  }
  EXPECT_EQ(tree_config_from_json(tree_config_to_json(config)), config);
}

TEST(NewtonTree, LeafValueIsRegularizedNewtonStep) {
  const Matrix x = Matrix::from_rows({{1}, {2}, {3}});
  const std::vector<double> g = {-1, -2, -3};
  const std::vector<double> h = {1, 1, 1};
  const std::vector<std::size_t> rows = {0, 1, 2};
  RandomStream rng(1);
  const auto tree = fit_tree_newton(x, g, h, rows, TreeConfig{.max_depth = 0},
                                    NewtonPenalty{.lambda = 1.0}, rng);
  EXPECT_DOUBLE_EQ(tree.nodes()[0].value, 6.0 / 4.0);
}

TEST(NewtonTree, HandComputedGain) {
  // G_L = -2 (H 2), G_R = 4 (H 2), lambda 0: gain = 0.5 (4/2 + 16/2 - 4/4) = 4.5
  const Matrix x = Matrix::from_rows({{0}, {0}, {1}, {1}});
  const std::vector<double> g = {-1, -1, 2, 2};
  const std::vector<double> h = {1, 1, 1, 1};
  const std::vector<std::size_t> rows = {0, 1, 2, 3};
  RandomStream rng(1);
  const auto split = fit_tree_newton(x, g, h, rows, TreeConfig{.max_depth = 1},
                                     NewtonPenalty{.lambda = 0.0, .gamma = 4.4}, rng);
  EXPECT_EQ(split.leaf_count(), 2u);
  const double lo = 0;
  EXPECT_DOUBLE_EQ(split.predict(std::span(&lo, 1)), 1.0);
  RandomStream rng2(1);
  const auto pruned = fit_tree_newton(x, g, h, rows, TreeConfig{.max_depth = 1},
                                      NewtonPenalty{.lambda = 0.0, .gamma = 4.6}, rng2);
  EXPECT_EQ(pruned.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(pruned.nodes()[0].value, -0.5);
}

TEST(NewtonTree, ZeroLambdaUnitHessianMatchesCart) {
  RandomStream data(6);
  const Matrix x = testing::uniform_matrix(60, 3, data);
  std::vector<double> y(60);
  for (auto& v : y) v = data.uniform01();
  std::vector<double> g(60);
  for (std::size_t i = 0; i < 60; ++i) g[i] = -y[i];
  const std::vector<double> h(60, 1.0);
  std::vector<std::size_t> rows(60);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const TreeConfig config{.max_depth = 3};
  RandomStream a(1);
  RandomStream b(1);
  const auto cart = fit_tree(x, y, config, a);
  const auto newton = fit_tree_newton(x, g, h, rows, config, NewtonPenalty{.lambda = 0.0}, b);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    EXPECT_NEAR(newton.predict(x.row(i)), cart.predict(x.row(i)), 1e-12);
  }
}

}  // namespace
}  // namespace premium
