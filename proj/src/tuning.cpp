#include "premium/tuning.hpp"

#include <algorithm>
#include <numeric>

#include "premium/error.hpp"
#include "premium/metrics.hpp"
#include "premium/parallel.hpp"
#include "premium/rng.hpp"

namespace premium {

namespace {

struct FoldScore {
  double train = 0.0;
  double validation = 0.0;
};

// Fits `spec` on the given training rows (scaler refit on them) and scores
// R^2 on the training rows and on the validation rows.
FoldScore fit_and_score(const Dataset& data, ModelSpec spec,
                        std::span<const std::size_t> train_rows,
                        std::span<const std::size_t> validation_rows,
                        std::uint64_t model_seed, bool score_train) {
  spec.set_seed(model_seed);
  const Dataset train = data.subset(train_rows);
  // Small folds can lose a rare flag entirely; such a column stays unscaled.
  const Model model =
      fit_scaled_model(spec, train, ConstantColumns::kPassThrough);
  FoldScore out;
  const Dataset validation = data.subset(validation_rows);
  out.validation = r_squared(validation.y, model.predict(validation.x));
  if (score_train) out.train = r_squared(train.y, model.predict(train.x));
  return out;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  return derive_seed(seed, StreamTag::kFoldModel, fold);
}

}  // namespace

std::size_t ParamGrid::cell_count() const {
  std::size_t count = 1;
  for (const auto& [name, values] : axes) count *= values.size();
  return count;
}

std::vector<Json> ParamGrid::cells() const {
  validate();
  std::vector<Json> out;
  const std::size_t total = cell_count();
  out.reserve(total);
  std::vector<std::size_t> digit(axes.size(), 0);
  for (std::size_t c = 0; c < total; ++c) {
    Json cell = Json::object();
    for (std::size_t a = 0; a < axes.size(); ++a) {
      cell[axes[a].first] = axes[a].second[digit[a]];
    }
    out.push_back(std::move(cell));
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++digit[a] < axes[a].second.size()) break;
      digit[a] = 0;
    }
  }
  return out;
}

ModelSpec ParamGrid::resolve(const Json& cell) const {
  ModelSpec spec = ModelSpec::from_json(variant, fixed);
  for (const auto& [name, value] : cell.items()) spec.set(name, value);
  spec.validate();
  return spec;
}

void ParamGrid::validate() const {
  if (axes.empty()) throw ValidationError("parameter grid has no axes");
  for (const auto& [name, values] : axes) {
    if (values.empty()) {
      throw ValidationError("parameter grid axis '" + name + "' is empty");
    }
    ModelSpec probe = ModelSpec::published(variant);
    for (const auto& v : values) probe.set(name, v);
  }
}

Json ParamGrid::to_json() const {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "grid";
  doc["model"] = std::string(variant_name(variant));
  Json params = Json::object();
  for (const auto& [name, values] : axes) params[name] = values;
  doc["params"] = std::move(params);
  if (!fixed.empty()) doc["fixed"] = fixed;
  return doc;
}

ParamGrid ParamGrid::from_json(const Json& doc) {
  require_document(doc, "grid");
  ParamGrid grid;
  try {
    grid.variant = parse_variant(doc.at("model").get<std::string>());
    const Json& params = doc.at("params");
    if (!params.is_object()) {
      throw ValidationError("grid 'params' must be an object");
    }
    for (const auto& [name, values] : params.items()) {
      if (!values.is_array()) {
        throw ValidationError("grid axis '" + name + "' must be a list");
      }
      grid.axes.emplace_back(name,
                             std::vector<Json>(values.begin(), values.end()));
    }
    if (const auto it = doc.find("fixed"); it != doc.end()) grid.fixed = *it;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed grid document: ") + e.what());
  }
  grid.validate();
  return grid;
}

ParamGrid ParamGrid::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n,
                                                    std::size_t k,
                                                    std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw ValidationError("fold count must satisfy 2 <= k <= n (k=" +
                          std::to_string(k) + ", n=" + std::to_string(n) +
                          ")");
  }
  RandomStream stream(seed, StreamTag::kFolds);
  const auto perm = stream.permutation(n);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

std::vector<std::size_t> fold_training_rows(
    const std::vector<std::vector<std::size_t>>& folds, std::size_t fold) {
  std::vector<std::size_t> rows;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f == fold) continue;
    rows.insert(rows.end(), folds[f].begin(), folds[f].end());
  }
  return rows;
}

double mean_of(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean of an empty list");
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<double> cross_val_score(const Dataset& data, const ModelSpec& spec,
                                    std::size_t k, std::uint64_t seed,
                                    std::size_t jobs) {
  data.validate();
  spec.validate();
  const auto folds = kfold_indices(data.n(), k, seed);
  std::vector<double> scores(k);
  parallel_for(k, jobs, [&](std::size_t f) {
    const auto train_rows = fold_training_rows(folds, f);
    scores[f] = fit_and_score(data, spec, train_rows, folds[f],
                              fold_seed(seed, f), false)
                    .validation;
  });
  return scores;
}

CvResult grid_search(const Dataset& data, const ParamGrid& grid, std::size_t k,
                     std::uint64_t seed, std::size_t jobs) {
  data.validate();
  const auto cells = grid.cells();
  const auto folds = kfold_indices(data.n(), k, seed);
  std::vector<ModelSpec> specs;
  specs.reserve(cells.size());
  for (const auto& cell : cells) specs.push_back(grid.resolve(cell));

  std::vector<double> scores(cells.size() * k);
  parallel_for(scores.size(), jobs, [&](std::size_t slot) {
    const std::size_t c = slot / k;
    const std::size_t f = slot % k;
    const auto train_rows = fold_training_rows(folds, f);
    scores[slot] = fit_and_score(data, specs[c], train_rows, folds[f],
                                 fold_seed(seed, f), false)
                       .validation;
  });

  CvResult result;
  result.variant = grid.variant;
  result.folds = k;
  result.seed = seed;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CvCell cell;
    cell.params = cells[c];
    cell.fold_scores.assign(scores.begin() + static_cast<std::ptrdiff_t>(c * k),
                            scores.begin() +
                                static_cast<std::ptrdiff_t>((c + 1) * k));
    cell.mean_score = mean_of(cell.fold_scores);
    result.cells.push_back(std::move(cell));
  }
  std::vector<std::size_t> order(result.cells.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.cells[a].mean_score > result.cells[b].mean_score;
  });
  for (std::size_t r = 0; r < order.size(); ++r) {
    result.cells[order[r]].rank = r + 1;
  }
  result.best_index = order.front();
  result.best_params = result.cells[result.best_index].params;
  result.best_mean_score = result.cells[result.best_index].mean_score;
  return result;
}

Json cv_result_to_json(const CvResult& result, const ParamGrid& grid) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "cv_result";
  doc["model"] = std::string(variant_name(result.variant));
  doc["folds"] = result.folds;
  doc["seed"] = result.seed;
  doc["scoring"] = "r_squared";
  Json cells = Json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"params", c.params},
                     {"fold_scores", c.fold_scores},
                     {"mean_score", c.mean_score},
                     {"rank", c.rank}});
  }
  doc["cells"] = std::move(cells);
  doc["best_index"] = result.best_index;
  doc["best_params"] = result.best_params;
  doc["best_mean_score"] = result.best_mean_score;
  doc["meta"] = artifact_meta(result.seed, grid.to_json());
  return doc;
}

std::vector<ImprovementRow> improvement_table(
    std::span<const ModelScores> scores) {
  std::vector<ImprovementRow> rows;
  for (const auto& s : scores) {
    const double train = 100.0 * s.train_r2;
    const double cv = 100.0 * s.cv_r2;
    const double test = 100.0 * s.test_r2;
    rows.push_back({s.model, train, cv, test, test - cv});
  }
  return rows;
}

LearningCurve learning_curve(const Dataset& data, const ModelSpec& spec,
                             std::span<const double> fractions, std::size_t k,
                             std::uint64_t seed, std::size_t jobs) {
  data.validate();
  spec.validate();
  if (fractions.empty()) throw ValidationError("no learning-curve fractions");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] <= 1.0)) {
      throw ValidationError("learning-curve fractions must lie in (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw ValidationError("learning-curve fractions must be increasing");
    }
  }
  const auto folds = kfold_indices(data.n(), k, seed);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t train_size = data.n() - folds[f].size();
    if (split_train_size(train_size, fractions.front()) < 2) {
      throw ValidationError("fraction " + format_exact(fractions.front()) +
                            " leaves fewer than two training rows");
    }
  }

  const std::size_t cells = fractions.size() * k;
  std::vector<FoldScore> scores(cells);
  std::vector<double> rows_used(cells);
  parallel_for(cells, jobs, [&](std::size_t slot) {
    const std::size_t fi = slot / k;
    const std::size_t f = slot % k;
    const auto train_rows = fold_training_rows(folds, f);
    const std::size_t count = split_train_size(train_rows.size(), fractions[fi]);
    const std::span<const std::size_t> prefix(train_rows.data(), count);
    scores[slot] =
        fit_and_score(data, spec, prefix, folds[f], fold_seed(seed, f), true);
    rows_used[slot] = static_cast<double>(count);
  });

  LearningCurve curve;
  curve.fractions.assign(fractions.begin(), fractions.end());
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    std::vector<double> train(k);
    std::vector<double> validation(k);
    std::vector<double> used(k);
    for (std::size_t f = 0; f < k; ++f) {
      train[f] = scores[fi * k + f].train;
      validation[f] = scores[fi * k + f].validation;
      used[f] = rows_used[fi * k + f];
    }
    curve.mean_rows.push_back(mean_of(used));
    curve.train_r2.push_back(mean_of(train));
    curve.validation_r2.push_back(mean_of(validation));
  }
  return curve;
}

}  // namespace premium
