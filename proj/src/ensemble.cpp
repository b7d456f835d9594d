#include "premium/ensemble.hpp"

#include <cmath>
#include <numeric>

#include "premium/error.hpp"
#include "premium/parallel.hpp"
#include "premium/rng.hpp"

namespace premium {

namespace {

void check_training_data(const Dataset& data) {
  data.validate();
  if (data.n() == 0) throw ValidationError("cannot train on empty data");
  if (data.n() < 2) throw ValidationError("training needs at least two rows");
  if (data.m() == 0) throw ValidationError("training needs at least one feature");
}

void check_row(std::span<const double> row, std::size_t expected) {
  if (row.size() != expected) {
    throw ValidationError("model expects " + std::to_string(expected) +
                          " features, got " + std::to_string(row.size()));
  }
}

std::vector<std::size_t> stage_rows(std::size_t n, double subsample,
                                    std::uint64_t seed, std::size_t stage) {
  std::vector<std::size_t> rows;
  if (subsample >= 1.0) {
    rows.resize(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
  }
  const std::size_t k = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::floor(subsample * static_cast<double>(n) + 0.5)));
  RandomStream stream(seed, StreamTag::kSubsample, stage);
  rows = stream.sample_without_replacement(n, k);
  std::sort(rows.begin(), rows.end());
  return rows;
}

void check_boost_config(const BoostConfig& config) {
  if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0)) {
    throw ValidationError("learning_rate must lie in (0, 1]");
  }
  if (!(config.subsample > 0.0 && config.subsample <= 1.0)) {
    throw ValidationError("subsample must lie in (0, 1]");
  }
  if (!(config.lambda >= 0.0) || !(config.gamma >= 0.0)) {
    throw ValidationError("lambda and gamma must be >= 0");
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Shared stage loop of both boosting variants. `fit_stage` receives the
// current training predictions and the stage's row subset.
template <typename FitStage>
BoostedModel boost(ModelVariant variant, const Dataset& data,
                   const BoostConfig& config, FitStage&& fit_stage) {
  check_training_data(data);
  check_boost_config(config);
  const std::size_t n = data.n();
  const double base = mean(data.y);
  std::vector<double> prediction(n, base);
  std::vector<RegressionTree> stages;
  stages.reserve(config.n_estimators);
  for (std::size_t t = 0; t < config.n_estimators; ++t) {
    const auto rows = stage_rows(n, config.subsample, config.seed, t);
    RandomStream stream(config.seed, StreamTag::kTreeFeatures, t);
    RegressionTree tree = fit_stage(prediction, rows, stream);
    for (std::size_t i = 0; i < n; ++i) {
      prediction[i] +=
          config.learning_rate * tree.predict_unchecked(data.x.row(i).data());
    }
    stages.push_back(std::move(tree));
  }
  return BoostedModel(variant, base, std::move(stages), config, data.m());
}

std::size_t json_count(const Json& value, std::string_view name,
                       std::size_t minimum) {
  if (!value.is_number()) {
    throw ValidationError(std::string(name) + " must be a number");
  }
  const double v = value.get<double>();
  if (v != std::floor(v) || v < static_cast<double>(minimum)) {
    throw ValidationError(std::string(name) + " must be an integer >= " +
                          std::to_string(minimum));
  }
  return static_cast<std::size_t>(v);
}

double json_real(const Json& value, std::string_view name) {
  if (!value.is_number()) {
    throw ValidationError(std::string(name) + " must be a number");
  }
  return value.get<double>();
}

}  // namespace

std::string_view variant_name(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kForest:
      return "rf";
    case ModelVariant::kGbm:
      return "gbm";
    case ModelVariant::kXgb:
      return "xgb";
  }
  return "rf";
}

std::string_view variant_label(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kForest:
      return "RF";
    case ModelVariant::kGbm:
      return "GBM";
    case ModelVariant::kXgb:
      return "XGBoost";
  }
  return "RF";
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "rf") return ModelVariant::kForest;
  if (name == "gbm") return ModelVariant::kGbm;
  if (name == "xgb") return ModelVariant::kXgb;
  throw ValidationError("unknown model variant '" + std::string(name) +
                        "' (expected rf, gbm or xgb)");
}

ForestConfig published_forest_config(std::uint64_t seed) {
  ForestConfig c;
  c.n_estimators = 220;
  c.tree.max_depth = 7;
  c.tree.min_samples_split = 3;
  c.tree.max_features = std::nullopt;  // 'auto' means all features here
  c.bootstrap = true;
  c.seed = seed;
  return c;
}

BoostConfig published_gbm_config(std::uint64_t seed) {
  BoostConfig c;
  c.n_estimators = 19;
  c.learning_rate = 0.19;
  c.tree.max_depth = 3;
  c.subsample = 1.0;
  c.lambda = 0.0;
  c.gamma = 0.0;
  c.seed = seed;
  return c;
}

BoostConfig published_xgb_config(std::uint64_t seed) {
  BoostConfig c;
  c.n_estimators = 50;
  c.learning_rate = 0.1;
  c.tree.max_depth = 5;
  c.subsample = 0.9;
  c.lambda = 1.0;
  c.gamma = 0.0;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------

ForestModel::ForestModel(std::vector<RegressionTree> trees,
                         ForestConfig config)
    : trees_(std::move(trees)), config_(config) {
  if (trees_.empty()) throw ValidationError("a forest needs at least one tree");
  for (const auto& t : trees_) {
    if (t.feature_count() != trees_.front().feature_count()) {
      throw ValidationError("forest trees disagree on feature count");
    }
  }
}

std::size_t ForestModel::feature_count() const noexcept {
  return trees_.empty() ? 0 : trees_.front().feature_count();
}

double ForestModel::predict_unchecked(const double* row) const noexcept {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict_unchecked(row);
  return sum / static_cast<double>(trees_.size());
}

double ForestModel::predict(std::span<const double> row) const {
  check_row(row, feature_count());
  return predict_unchecked(row.data());
}

BoostedModel::BoostedModel(ModelVariant variant, double base_score,
                           std::vector<RegressionTree> stages,
                           BoostConfig config, std::size_t feature_count)
    : variant_(variant),
      base_score_(base_score),
      stages_(std::move(stages)),
      config_(config),
      feature_count_(feature_count) {
  for (const auto& t : stages_) {
    if (t.feature_count() != feature_count_) {
      throw ValidationError("boosting stage has the wrong feature count");
    }
  }
}

double BoostedModel::predict_unchecked(const double* row) const noexcept {
  double y = base_score_;
  for (const auto& tree : stages_) {
    y += config_.learning_rate * tree.predict_unchecked(row);
  }
  return y;
}

double BoostedModel::predict(std::span<const double> row) const {
  check_row(row, feature_count_);
  return predict_unchecked(row.data());
}

double BoostedModel::predict_stages(std::span<const double> row,
                                    std::size_t stage_count) const {
  check_row(row, feature_count_);
  stage_count = std::min(stage_count, stages_.size());
  double y = base_score_;
  for (std::size_t t = 0; t < stage_count; ++t) {
    y += config_.learning_rate * stages_[t].predict_unchecked(row.data());
  }
  return y;
}

// ---------------------------------------------------------------------------

ForestModel fit_forest(const Dataset& data, const ForestConfig& config,
                       std::size_t jobs) {
  check_training_data(data);
  if (config.n_estimators == 0) {
    throw ValidationError("n_estimators must be >= 1 for a forest");
  }
  const std::size_t n = data.n();
  std::vector<RegressionTree> trees(config.n_estimators);
  parallel_for(config.n_estimators, jobs, [&](std::size_t k) {
    std::vector<std::size_t> rows(n);
    if (config.bootstrap) {
      RandomStream draw(config.seed, StreamTag::kBootstrap, k);
      for (auto& r : rows) r = draw.uniform_index(n);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    RandomStream stream(config.seed, StreamTag::kTreeFeatures, k);
    trees[k] = fit_tree(data.x, data.y, rows, config.tree, stream);
  });
  return ForestModel(std::move(trees), config);
}

BoostedModel fit_gbm(const Dataset& data, const BoostConfig& config) {
  std::vector<double> residual(data.n());
  return boost(ModelVariant::kGbm, data, config,
               [&](const std::vector<double>& prediction,
                   std::span<const std::size_t> rows, RandomStream& stream) {
                 for (std::size_t i = 0; i < data.n(); ++i) {
                   residual[i] = data.y[i] - prediction[i];
                 }
                 return fit_tree(data.x, residual, rows, config.tree, stream);
               });
}

BoostedModel fit_xgb(const Dataset& data, const BoostConfig& config) {
  std::vector<double> gradient(data.n());
  const std::vector<double> hessian(data.n(), 1.0);
  const NewtonPenalty penalty{config.lambda, config.gamma};
  return boost(ModelVariant::kXgb, data, config,
               [&](const std::vector<double>& prediction,
                   std::span<const std::size_t> rows, RandomStream& stream) {
                 for (std::size_t i = 0; i < data.n(); ++i) {
                   gradient[i] = prediction[i] - data.y[i];
                 }
                 return fit_tree_newton(data.x, gradient, hessian, rows,
                                        config.tree, penalty, stream);
               });
}

std::vector<std::vector<double>> boosting_trajectory(const BoostedModel& model,
                                                     const Matrix& x) {
  std::vector<std::vector<double>> out;
  std::vector<double> current(x.rows(), model.base_score());
  out.push_back(current);
  for (const auto& tree : model.stages()) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      current[i] += model.learning_rate() * tree.predict(x.row(i));
    }
    out.push_back(current);
  }
  return out;
}

// ---------------------------------------------------------------------------

ModelSpec ModelSpec::published(ModelVariant variant, std::uint64_t seed) {
  ModelSpec spec;
  spec.variant = variant;
  spec.forest = published_forest_config(seed);
  spec.boost = variant == ModelVariant::kXgb ? published_xgb_config(seed)
                                             : published_gbm_config(seed);
  return spec;
}

void ModelSpec::set(std::string_view name, const Json& value) {
  const bool forest = variant == ModelVariant::kForest;
  TreeConfig& tree = forest ? this->forest.tree : boost.tree;
  if (name == "n_estimators") {
    const auto k = json_count(value, name, forest ? 1 : 0);
    (forest ? this->forest.n_estimators : boost.n_estimators) = k;
  } else if (name == "max_depth") {
    if (value.is_null()) {
      tree.max_depth = std::nullopt;
    } else {
      tree.max_depth = json_count(value, name, 0);
    }
  } else if (name == "min_samples_split") {
    tree.min_samples_split = json_count(value, name, 2);
  } else if (name == "max_features") {
    if (value.is_null() ||
        (value.is_string() && (value == "all" || value == "auto"))) {
      tree.max_features = std::nullopt;
    } else if (value.is_string()) {
      throw ValidationError("max_features must be a count, 'all' or 'auto'");
    } else {
      tree.max_features = json_count(value, name, 1);
    }
  } else if (name == "min_gain") {
    const double g = json_real(value, name);
    if (!(g >= 0.0)) throw ValidationError("min_gain must be >= 0");
    tree.min_gain = g;
  } else if (name == "bootstrap" && forest) {
    if (!value.is_boolean()) throw ValidationError("bootstrap must be a boolean");
    this->forest.bootstrap = value.get<bool>();
  } else if (name == "learning_rate" && !forest) {
    const double lr = json_real(value, name);
    if (!(lr > 0.0 && lr <= 1.0)) {
      throw ValidationError("learning_rate must lie in (0, 1]");
    }
    boost.learning_rate = lr;
  } else if (name == "subsample" && !forest) {
    const double s = json_real(value, name);
    if (!(s > 0.0 && s <= 1.0)) {
      throw ValidationError("subsample must lie in (0, 1]");
    }
    boost.subsample = s;
  } else if ((name == "lambda" || name == "reg_lambda") &&
             variant == ModelVariant::kXgb) {
    const double l = json_real(value, name);
    if (!(l >= 0.0)) throw ValidationError("lambda must be >= 0");
    boost.lambda = l;
  } else if (name == "gamma" && variant == ModelVariant::kXgb) {
    const double g = json_real(value, name);
    if (!(g >= 0.0)) throw ValidationError("gamma must be >= 0");
    boost.gamma = g;
  } else {
    throw ValidationError("'" + std::string(name) +
                          "' is not a hyperparameter of " +
                          std::string(variant_name(variant)));
  }
}

void ModelSpec::set_seed(std::uint64_t seed) {
  forest.seed = seed;
  boost.seed = seed;
}

std::uint64_t ModelSpec::seed() const {
  return variant == ModelVariant::kForest ? forest.seed : boost.seed;
}

void ModelSpec::validate() const {
  if (variant == ModelVariant::kForest) {
    if (forest.n_estimators == 0) {
      throw ValidationError("n_estimators must be >= 1 for a forest");
    }
  } else {
    check_boost_config(boost);
  }
}

Json ModelSpec::to_json() const {
  Json out;
  const bool is_forest = variant == ModelVariant::kForest;
  const TreeConfig& tree = is_forest ? forest.tree : boost.tree;
  out["n_estimators"] = is_forest ? forest.n_estimators : boost.n_estimators;
  const Json tree_doc = tree_config_to_json(tree);
  for (const auto& [key, value] : tree_doc.items()) out[key] = value;
  if (is_forest) {
    out["bootstrap"] = forest.bootstrap;
  } else {
    out["learning_rate"] = boost.learning_rate;
    out["subsample"] = boost.subsample;
    if (variant == ModelVariant::kXgb) {
      out["lambda"] = boost.lambda;
      out["gamma"] = boost.gamma;
    }
  }
  out["seed"] = seed();
  return out;
}

ModelSpec ModelSpec::from_json(ModelVariant variant, const Json& params) {
  if (!params.is_object()) {
    throw ValidationError("model parameters must be a JSON object");
  }
  ModelSpec spec = published(variant);
  for (const auto& [key, value] : params.items()) {
    if (key == "seed") {
      if (!value.is_number_unsigned() && !value.is_number_integer()) {
        throw ValidationError("seed must be an integer");
      }
      spec.set_seed(value.get<std::uint64_t>());
    } else {
      spec.set(key, value);
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------

Model::Model(ForestModel forest, std::vector<std::string> feature_names,
             std::optional<ScalerState> scaler)
    : ensemble_(std::move(forest)),
      feature_names_(std::move(feature_names)),
      scaler_(std::move(scaler)) {
  if (std::get<ForestModel>(ensemble_).feature_count() !=
      feature_names_.size()) {
    throw ValidationError("feature names do not match the model");
  }
  if (scaler_ && scaler_->size() != feature_names_.size()) {
    throw ValidationError("scaler does not match the model");
  }
}

Model::Model(BoostedModel boosted, std::vector<std::string> feature_names,
             std::optional<ScalerState> scaler)
    : ensemble_(std::move(boosted)),
      feature_names_(std::move(feature_names)),
      scaler_(std::move(scaler)) {
  if (std::get<BoostedModel>(ensemble_).feature_count() !=
      feature_names_.size()) {
    throw ValidationError("feature names do not match the model");
  }
  if (scaler_ && scaler_->size() != feature_names_.size()) {
    throw ValidationError("scaler does not match the model");
  }
}

ModelVariant Model::variant() const noexcept {
  if (const auto* b = std::get_if<BoostedModel>(&ensemble_)) {
    return b->variant();
  }
  return ModelVariant::kForest;
}

double Model::predict_scaled(const double* row) const noexcept {
  return std::visit([row](const auto& m) { return m.predict_unchecked(row); },
                    ensemble_);
}

double Model::predict(std::span<const double> row) const {
  check_row(row, feature_count());
  if (!scaler_) return predict_scaled(row.data());
  // Small fixed buffer keeps the hot path allocation-free for typical widths.
  constexpr std::size_t kInline = 32;
  if (row.size() <= kInline) {
    double buf[kInline];
    scaler_->transform(row, std::span<double>(buf, row.size()));
    return predict_scaled(buf);
  }
  std::vector<double> scaled(row.size());
  scaler_->transform(row, scaled);
  return predict_scaled(scaled.data());
}

std::vector<double> Model::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(x.row(i));
  return out;
}

PredictFn Model::as_function() const {
  return [this](std::span<const double> row) { return predict(row); };
}

Json Model::config_json() const {
  ModelSpec spec;
  spec.variant = variant();
  if (const auto* f = std::get_if<ForestModel>(&ensemble_)) {
    spec.forest = f->config();
  } else {
    spec.boost = std::get<BoostedModel>(ensemble_).config();
  }
  return spec.to_json();
}

Model fit_model(const ModelSpec& spec, const Dataset& data, std::size_t jobs) {
  spec.validate();
  switch (spec.variant) {
    case ModelVariant::kForest:
      return Model(fit_forest(data, spec.forest, jobs), data.feature_names);
    case ModelVariant::kGbm:
      return Model(fit_gbm(data, spec.boost), data.feature_names);
    case ModelVariant::kXgb:
      return Model(fit_xgb(data, spec.boost), data.feature_names);
  }
  throw ValidationError("unknown model variant");
}

Model fit_scaled_model(const ModelSpec& spec, const Dataset& data,
                       ConstantColumns policy, std::size_t jobs) {
  std::vector<std::size_t> all(data.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  ScalerState scaler = fit_scaler(data, all, policy);
  const Dataset scaled = apply_scaler(scaler, data);
  Model fitted = fit_model(spec, scaled, jobs);
  if (const auto* f = std::get_if<ForestModel>(&fitted.ensemble())) {
    return Model(*f, data.feature_names, std::move(scaler));
  }
  return Model(std::get<BoostedModel>(fitted.ensemble()), data.feature_names,
               std::move(scaler));
}

// ---------------------------------------------------------------------------

Json model_to_json(const Model& model, std::uint64_t seed) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "model";
  doc["variant"] = std::string(variant_name(model.variant()));
  const Json config = model.config_json();
  doc["config"] = config;
  doc["feature_names"] = model.feature_names();
  if (model.scaler()) {
    doc["scaler"] = {{"mean", model.scaler()->mean},
                     {"stddev", model.scaler()->stddev}};
  }
  Json trees = Json::array();
  if (const auto* f = std::get_if<ForestModel>(&model.ensemble())) {
    for (const auto& t : f->trees()) trees.push_back(t.to_json());
  } else {
    const auto& b = std::get<BoostedModel>(model.ensemble());
    doc["base_score"] = b.base_score();
    doc["learning_rate"] = b.learning_rate();
    for (const auto& t : b.stages()) trees.push_back(t.to_json());
  }
  doc["trees"] = std::move(trees);
  doc["meta"] = artifact_meta(seed, config);
  return doc;
}

Model model_from_json(const Json& doc) {
  require_document(doc, "model");
  try {
    const ModelVariant variant =
        parse_variant(doc.at("variant").get<std::string>());
    auto names = doc.at("feature_names").get<std::vector<std::string>>();
    const ModelSpec spec = ModelSpec::from_json(variant, doc.at("config"));
    std::optional<ScalerState> scaler;
    if (const auto it = doc.find("scaler"); it != doc.end()) {
      ScalerState s;
      s.mean = it->at("mean").get<std::vector<double>>();
      s.stddev = it->at("stddev").get<std::vector<double>>();
      scaler = std::move(s);
    }
    const TreeConfig& tree_config = variant == ModelVariant::kForest
                                        ? spec.forest.tree
                                        : spec.boost.tree;
    std::vector<RegressionTree> trees;
    for (const auto& t : doc.at("trees")) {
      trees.push_back(
          RegressionTree::from_json(t, names.size(), tree_config));
    }
    if (variant == ModelVariant::kForest) {
      if (trees.size() != spec.forest.n_estimators) {
        throw IoError("model document tree count does not match its config");
      }
      return Model(ForestModel(std::move(trees), spec.forest),
                   std::move(names), std::move(scaler));
    }
    if (trees.size() != spec.boost.n_estimators) {
      throw IoError("model document stage count does not match its config");
    }
    BoostedModel boosted(variant, doc.at("base_score").get<double>(),
                         std::move(trees), spec.boost, names.size());
    return Model(std::move(boosted), std::move(names), std::move(scaler));
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed model document: ") + e.what());
  } catch (const ValidationError& e) {
    throw IoError(std::string("invalid model document: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_json_file(path, model_to_json(model, model.config_json()["seed"]
                                                 .get<std::uint64_t>()));
}

Model load_model(const std::filesystem::path& path) {
  return model_from_json(read_json_file(path));
}

}  // namespace premium
