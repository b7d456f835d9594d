#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "premium/dataset.hpp"
#include "premium/ensemble.hpp"
#include "premium/io.hpp"

namespace premium {

// Candidate values per hyperparameter, enumerated in declaration order.
// `fixed` holds parameters applied to every cell before the grid values.
struct ParamGrid {
  ModelVariant variant = ModelVariant::kForest;
  std::vector<std::pair<std::string, std::vector<Json>>> axes;
  Json fixed = Json::object();

  std::size_t cell_count() const;
  // Cartesian product, last axis varying fastest. Each cell is an object
  // keyed in axis order.
  std::vector<Json> cells() const;
  ModelSpec resolve(const Json& cell) const;
  void validate() const;

  Json to_json() const;
  static ParamGrid from_json(const Json& doc);
  static ParamGrid load(const std::filesystem::path& path);
};

// k shuffled folds of consecutive permutation chunks; the first n % k folds
// hold one extra row.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n,
                                                    std::size_t k,
                                                    std::uint64_t seed);

// Training rows for one fold: the other folds concatenated in fold order.
std::vector<std::size_t> fold_training_rows(
    const std::vector<std::vector<std::size_t>>& folds, std::size_t fold);

// Per-fold R^2. In every fold the scaler is refit on the training portion
// and the model seed is derived from (seed, fold).
std::vector<double> cross_val_score(const Dataset& data, const ModelSpec& spec,
                                    std::size_t k, std::uint64_t seed,
                                    std::size_t jobs = 1);

double mean_of(std::span<const double> values);

struct CvCell {
  Json params;
  std::vector<double> fold_scores;
  double mean_score = 0.0;
  std::size_t rank = 0;  // 1 = best
};

struct CvResult {
  ModelVariant variant = ModelVariant::kForest;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<CvCell> cells;
  std::size_t best_index = 0;
  Json best_params;
  double best_mean_score = 0.0;
};

// Exhaustive search; the best cell has the highest mean R^2 with ties going
// to the earliest cell in enumeration order.
CvResult grid_search(const Dataset& data, const ParamGrid& grid, std::size_t k,
                     std::uint64_t seed, std::size_t jobs = 1);

Json cv_result_to_json(const CvResult& result, const ParamGrid& grid);

struct ImprovementRow {
  std::string model;
  double train_r2 = 0.0;  // percent
  double cv_r2 = 0.0;     // percent
  double test_r2 = 0.0;   // percent
  double improvement = 0.0;  // test - cv, percentage points
};

// R^2 fractions.
struct ModelScores {
  std::string model;
  double train_r2 = 0.0;
  double cv_r2 = 0.0;
  double test_r2 = 0.0;
};

std::vector<ImprovementRow> improvement_table(
    std::span<const ModelScores> scores);

struct LearningCurve {
  std::vector<double> fractions;
  std::vector<double> mean_rows;  // training rows used, averaged over folds
  std::vector<double> train_r2;
  std::vector<double> validation_r2;
};

// Nested training subsets: for each fold, fraction f keeps the first
// round(f * |train|) rows of that fold's training list.
LearningCurve learning_curve(const Dataset& data, const ModelSpec& spec,
                             std::span<const double> fractions, std::size_t k,
                             std::uint64_t seed, std::size_t jobs = 1);

}  // namespace premium
