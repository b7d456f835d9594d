#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "premium/dataset.hpp"
#include "premium/io.hpp"
#include "premium/tree.hpp"

namespace premium {

enum class ModelVariant { kForest, kGbm, kXgb };

std::string_view variant_name(ModelVariant variant);  // "rf", "gbm", "xgb"
ModelVariant parse_variant(std::string_view name);
std::string_view variant_label(ModelVariant variant);  // "RF", "GBM", "XGBoost"

struct ForestConfig {
  std::size_t n_estimators = 100;
  TreeConfig tree;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

struct BoostConfig {
  std::size_t n_estimators = 100;
  double learning_rate = 0.1;
  TreeConfig tree;
  double subsample = 1.0;
  double lambda = 1.0;  // xgb only
  double gamma = 0.0;   // xgb only
  std::uint64_t seed = 0;

  friend bool operator==(const BoostConfig&, const BoostConfig&) = default;
};

// Best parameters from the published grid searches. Unlisted knobs take the
// defaults of the corresponding reference toolkits (GBM depth 3, XGB
// lambda 1).
ForestConfig published_forest_config(std::uint64_t seed = 0);
BoostConfig published_gbm_config(std::uint64_t seed = 0);
BoostConfig published_xgb_config(std::uint64_t seed = 0);

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<RegressionTree> trees, ForestConfig config);

  // Unweighted mean of the member trees, summed in tree order.
  double predict(std::span<const double> row) const;
  double predict_unchecked(const double* row) const noexcept;

  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
  const ForestConfig& config() const noexcept { return config_; }
  std::size_t feature_count() const noexcept;

 private:
  std::vector<RegressionTree> trees_;
  ForestConfig config_;
};

class BoostedModel {
 public:
  BoostedModel() = default;
  BoostedModel(ModelVariant variant, double base_score,
               std::vector<RegressionTree> stages, BoostConfig config,
               std::size_t feature_count);

  // base_score, then += learning_rate * f_k(x) for each stage in order.
  double predict(std::span<const double> row) const;
  double predict_unchecked(const double* row) const noexcept;
  // Prediction using only the first `stage_count` stages.
  double predict_stages(std::span<const double> row,
                        std::size_t stage_count) const;

  ModelVariant variant() const noexcept { return variant_; }
  double base_score() const noexcept { return base_score_; }
  double learning_rate() const noexcept { return config_.learning_rate; }
  const std::vector<RegressionTree>& stages() const noexcept {
    return stages_;
  }
  const BoostConfig& config() const noexcept { return config_; }
  std::size_t feature_count() const noexcept { return feature_count_; }

 private:
  ModelVariant variant_ = ModelVariant::kGbm;
  double base_score_ = 0.0;
  std::vector<RegressionTree> stages_;
  BoostConfig config_;
  std::size_t feature_count_ = 0;
};

// Bootstrap (with replacement) per tree; streams derive from (seed, k).
ForestModel fit_forest(const Dataset& data, const ForestConfig& config,
                       std::size_t jobs = 1);
// Squared-error gradient boosting; subsampling without replacement per stage.
BoostedModel fit_gbm(const Dataset& data, const BoostConfig& config);
// Second-order regularized boosting with g = yhat - y, h = 1.
BoostedModel fit_xgb(const Dataset& data, const BoostConfig& config);

// Training-set predictions after each stage; element t holds yhat^(t) for
// every row (t = 0 is the base score). Used to check training trajectories.
std::vector<std::vector<double>> boosting_trajectory(const BoostedModel& model,
                                                     const Matrix& x);

// Variant plus its configuration; what grids and the command line edit.
struct ModelSpec {
  ModelVariant variant = ModelVariant::kForest;
  ForestConfig forest;
  BoostConfig boost;

  static ModelSpec published(ModelVariant variant, std::uint64_t seed = 0);

  // Sets one named hyperparameter. Names: n_estimators, max_depth,
  // min_samples_split, max_features, learning_rate, subsample, lambda,
  // gamma, bootstrap, min_gain. Throws ValidationError for a name the
  // variant does not have or an out-of-range value.
  void set(std::string_view name, const Json& value);
  void set_seed(std::uint64_t seed);
  std::uint64_t seed() const;
  void validate() const;
  Json to_json() const;
  static ModelSpec from_json(ModelVariant variant, const Json& params);
};

using PredictFn = std::function<double(std::span<const double>)>;

// A fitted ensemble together with the standardization it was trained
// under. predict() takes rows in raw (unscaled) feature units.
class Model {
 public:
  Model() = default;
  Model(ForestModel forest, std::vector<std::string> feature_names,
        std::optional<ScalerState> scaler = std::nullopt);
  Model(BoostedModel boosted, std::vector<std::string> feature_names,
        std::optional<ScalerState> scaler = std::nullopt);

  double predict(std::span<const double> row) const;
  std::vector<double> predict(const Matrix& x) const;
  PredictFn as_function() const;

  ModelVariant variant() const noexcept;
  std::size_t feature_count() const noexcept { return feature_names_.size(); }
  const std::vector<std::string>& feature_names() const noexcept {
    return feature_names_;
  }
  const std::optional<ScalerState>& scaler() const noexcept { return scaler_; }
  const std::variant<ForestModel, BoostedModel>& ensemble() const noexcept {
    return ensemble_;
  }
  Json config_json() const;

 private:
  double predict_scaled(const double* row) const noexcept;

  std::variant<ForestModel, BoostedModel> ensemble_;
  std::vector<std::string> feature_names_;
  std::optional<ScalerState> scaler_;
};

// Fits `spec` on data as given (no scaling).
Model fit_model(const ModelSpec& spec, const Dataset& data,
                std::size_t jobs = 1);

// Fits a scaler on data, trains on the scaled matrix and bundles both.
Model fit_scaled_model(const ModelSpec& spec, const Dataset& data,
                       ConstantColumns policy = ConstantColumns::kReject,
                       std::size_t jobs = 1);

Json model_to_json(const Model& model, std::uint64_t seed);
Model model_from_json(const Json& doc);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace premium
