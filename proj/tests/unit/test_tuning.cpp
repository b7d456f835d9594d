#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "premium/dataset.hpp"
#include "premium/error.hpp"
#include "premium/tuning.hpp"
#include "synthetic.hpp"

namespace premium {
namespace {

Dataset synthetic(std::size_t rows, std::uint64_t seed) {
  return derive_features(parse_insurance_csv(testing::synthetic_insurance_csv(rows, seed)));
}

ParamGrid one_axis(ModelVariant v, std::string name, std::vector<Json> values, Json fixed = Json::object()) {
  ParamGrid g;
  g.variant = v;
  g.axes.emplace_back(std::move(name), std::move(values));
  g.fixed = std::move(fixed);
  return g;
}

TEST(KFold, SizesAndPartition) {
  const auto even = kfold_indices(10, 5, 1);
  for (const auto& f : even) EXPECT_EQ(f.size(), 2u);
  const auto odd = kfold_indices(11, 5, 1);
  std::vector<std::size_t> sizes;
  for (const auto& f : odd) sizes.push_back(f.size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 2, 2, 2, 2}));
  std::set<std::size_t> seen;
  for (const auto& f : odd) {
    for (const auto r : f) EXPECT_TRUE(seen.insert(r).second);
  }
  EXPECT_EQ(seen.size(), 11u);
  EXPECT_EQ(kfold_indices(11, 5, 1), odd);
  EXPECT_THROW(kfold_indices(3, 5, 1), ValidationError);
  EXPECT_THROW(kfold_indices(10, 1, 1), ValidationError);
}

TEST(KFold, TrainingRowsAreTheComplement) {
  const auto folds = kfold_indices(23, 4, 9);
  for (std::size_t f = 0; f < 4; ++f) {
    auto train = fold_training_rows(folds, f);
    EXPECT_EQ(train.size() + folds[f].size(), 23u);
    for (const auto r : folds[f]) EXPECT_EQ(std::count(train.begin(), train.end(), r), 0);
  }
}

TEST(Grid, CellsEnumerateLastAxisFastest) {
  ParamGrid g;
  g.variant = ModelVariant::kGbm;
  g.axes = {{"n_estimators", {10, 20}}, {"learning_rate", {0.1, 0.2, 0.3}}};
  ASSERT_EQ(g.cell_count(), 6u);
  const auto cells = g.cells();
  EXPECT_EQ(cells[0]["n_estimators"], 10);
  EXPECT_EQ(cells[1]["learning_rate"], 0.2);
  EXPECT_EQ(cells[3]["n_estimators"], 20);
  EXPECT_EQ(cells[3]["learning_rate"], 0.1);
  const auto back = ParamGrid::from_json(g.to_json());
  EXPECT_EQ(back.cells(), cells);
}

TEST(Grid, RejectsUnknownOrEmptyAxes) {
  EXPECT_THROW(one_axis(ModelVariant::kForest, "learning_rate", {0.1}).validate(), ValidationError);
  EXPECT_THROW(one_axis(ModelVariant::kGbm, "n_estimators", {}).validate(), ValidationError);
  Json doc = one_axis(ModelVariant::kGbm, "n_estimators", {5}).to_json();
  doc["format_version"] = 7;
  EXPECT_THROW(ParamGrid::from_json(doc), IoError);
}

TEST(CrossValidation, ConstantModelScoresAtMostZero) {
  const Dataset d = synthetic(120, 3);
  ModelSpec spec = ModelSpec::published(ModelVariant::kXgb);
  spec.set("gamma", 1e15);
  spec.set("subsample", 1.0);
  for (const double s : cross_val_score(d, spec, 5, 1)) EXPECT_LE(s, 1e-12);
}

TEST(CrossValidation, JobsDoNotChangeScores) {
  const Dataset d = synthetic(100, 4);
  ModelSpec spec = ModelSpec::published(ModelVariant::kForest);
  spec.set("n_estimators", 10);
  EXPECT_EQ(cross_val_score(d, spec, 4, 2, 1), cross_val_score(d, spec, 4, 2, 3));
}

TEST(GridSearch, SingleCellEqualsCrossValidation) {
  const Dataset d = synthetic(100, 5);
  const auto grid = one_axis(ModelVariant::kGbm, "n_estimators", {15});
  const auto result = grid_search(d, grid, 5, 8);
  ASSERT_EQ(result.cells.size(), 1u);
  const auto direct = cross_val_score(d, grid.resolve(result.best_params), 5, 8);
  EXPECT_EQ(result.cells[0].fold_scores, direct);
  EXPECT_EQ(result.best_mean_score, mean_of(direct));
  EXPECT_EQ(result.cells[0].rank, 1u);
}

TEST(GridSearch, MoreStagesBeatNone) {
  const Dataset d = synthetic(150, 6);
  const auto grid = one_axis(ModelVariant::kGbm, "n_estimators", {1, 50},
                             Json{{"learning_rate", 0.2}});
  const auto result = grid_search(d, grid, 5, 2);
  EXPECT_EQ(result.best_params["n_estimators"], 50);
  EXPECT_EQ(result.best_index, 1u);
}

TEST(GridSearch, TiesGoToTheFirstCell) {
  const Dataset d = synthetic(80, 7);
  // gamma is huge so every cell is the same constant model.
  const auto grid = one_axis(ModelVariant::kXgb, "max_depth", {2, 3, 4},
                             Json{{"gamma", 1e15}, {"subsample", 1.0}});
  const auto result = grid_search(d, grid, 4, 1);
  EXPECT_EQ(result.cells[0].mean_score, result.cells[2].mean_score);
  EXPECT_EQ(result.best_index, 0u);
  EXPECT_EQ(result.cells[1].rank, 2u);
}

TEST(GridSearch, RanksAreAPermutation) {
  const Dataset d = synthetic(90, 8);
  ParamGrid g;
  g.variant = ModelVariant::kGbm;
  g.axes = {{"n_estimators", {5, 20}}, {"learning_rate", {0.1, 0.5}}};
  const auto result = grid_search(d, g, 3, 4);
  std::vector<std::size_t> ranks;
  for (const auto& c : result.cells) {
    ranks.push_back(c.rank);
    EXPECT_LE(c.mean_score, result.best_mean_score);
  }
  std::sort(ranks.begin(), ranks.end());
  EXPECT_EQ(ranks, (std::vector<std::size_t>{1, 2, 3, 4}));
  const Json doc = cv_result_to_json(result, g);
  EXPECT_EQ(doc["kind"], "cv_result");
  EXPECT_EQ(doc["cells"].size(), 4u);
}

TEST(LearningCurve, ShapeAndFullFraction) {
  const Dataset d = synthetic(100, 9);
  ModelSpec spec = ModelSpec::published(ModelVariant::kGbm);
  const std::vector<double> fractions = {0.25, 0.5, 1.0};
  const auto curve = learning_curve(d, spec, fractions, 5, 3);
  EXPECT_EQ(curve.fractions, fractions);
  ASSERT_EQ(curve.train_r2.size(), 3u);
  ASSERT_EQ(curve.validation_r2.size(), 3u);
  EXPECT_EQ(curve.mean_rows.back(), 80.0);
  EXPECT_EQ(curve.mean_rows.front(), 20.0);
  EXPECT_LT(curve.mean_rows[0], curve.mean_rows[1]);
  EXPECT_NEAR(curve.validation_r2.back(), mean_of(cross_val_score(d, spec, 5, 3)), 1e-12);
}

TEST(LearningCurve, RejectsBadFractions) {
  const Dataset d = synthetic(40, 10);
  const ModelSpec spec = ModelSpec::published(ModelVariant::kGbm);
  const std::vector<double> descending = {0.5, 0.2};
  EXPECT_THROW(learning_curve(d, spec, descending, 5, 1), ValidationError);
  const std::vector<double> tiny = {0.01, 1.0};
  EXPECT_THROW(learning_curve(d, spec, tiny, 5, 1), ValidationError);
}

TEST(Improvement, DifferenceOfTestAndCv) {
  const std::vector<ModelScores> scores = {{"XGBoost", 0.88222, 0.74475, 0.86470}};
  const auto rows = improvement_table(scores);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].improvement, 11.995, 1e-9);
  EXPECT_NEAR(rows[0].train_r2, 88.222, 1e-9);
}

}  // namespace
}  // namespace premium
