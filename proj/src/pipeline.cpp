#include "premium/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "premium/error.hpp"
#include "premium/explain.hpp"
#include "premium/report.hpp"

namespace premium {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string v_name(ModelVariant v) { return std::string(variant_name(v)); }

Json meta_with_kind(std::string_view kind, std::uint64_t seed,
                    const Json& config) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = std::string(kind);
  doc["meta"] = artifact_meta(seed, config);
  return doc;
}

void write_timing(const fs::path& out, const std::string& name,
                  double seconds) {
  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["kind"] = "timing";
  doc["name"] = name;
  doc["wall_seconds"] = seconds;
  write_json_file(out / "timings" / (name + ".json"), doc);
}

FigureSpec figure(FigureKind kind, std::string title, std::string x_label,
                  std::string y_label, std::uint64_t seed, const Json& config) {
  FigureSpec spec;
  spec.kind = kind;
  spec.title = std::move(title);
  spec.x_label = std::move(x_label);
  spec.y_label = std::move(y_label);
  spec.meta = artifact_meta(seed, config);
  spec.meta["figure"] = std::string(figure_kind_name(kind));
  return spec;
}

// Binary and count features shown against the target in group box plots.
const std::vector<std::string>& boxplot_features() {
  static const std::vector<std::string> names = {
      "Diabetes",        "BloodPressureProblems",  "AnyTransplants",
      "AnyChronicDiseases", "KnownAllergies",      "HistoryOfCancerInFamily",
      "NumberOfMajorSurgeries"};
  return names;
}

std::vector<std::string> present_boxplot_features(const Dataset& data) {
  std::vector<std::string> out;
  for (const auto& name : boxplot_features()) {
    if (std::find(data.feature_names.begin(), data.feature_names.end(), name) !=
        data.feature_names.end()) {
      out.push_back(name);
    }
  }
  return out;
}

std::string format_group_value(double v) {
  return v == std::floor(v) ? std::to_string(static_cast<long long>(v))
                            : format_exact(v);
}

void check_model_matches(const Model& model, const Dataset& data) {
  if (model.feature_names() != data.feature_names) {
    throw ValidationError("model expects " +
                          std::to_string(model.feature_count()) +
                          " features that do not match the dataset's " +
                          std::to_string(data.m()) + " features");
  }
}

std::uint64_t model_seed_of(const Json& model_doc) {
  if (const auto it = model_doc.find("meta"); it != model_doc.end()) {
    if (const auto s = it->find("seed"); s != it->end()) {
      return s->get<std::uint64_t>();
    }
  }
  return kDefaultSeed;
}

void write_learning_curve(const fs::path& out, ModelVariant variant,
                          const LearningCurve& curve, std::uint64_t seed,
                          const Json& config) {
  CsvBuilder csv;
  csv.comment(provenance_line("learning_curve", seed, config));
  csv.header({"fraction", "train_rows", "train_r2", "validation_r2"});
  for (std::size_t i = 0; i < curve.fractions.size(); ++i) {
    csv.row({format_exact(curve.fractions[i]), format_exact(curve.mean_rows[i]),
             format_exact(curve.train_r2[i]),
             format_exact(curve.validation_r2[i])});
  }
  const std::string name = v_name(variant);
  write_file_atomic(out / "curves" / ("learning_curve_" + name + ".csv"),
                    csv.str());
  write_figure(out / "figures" / ("learning_curve_" + name + ".svg"),
               figure(FigureKind::kLearningCurve,
                      "Learning curve (" + std::string(variant_label(variant)) + ")",
                      "Training instances", "R2", seed, config),
               curve);
}

}  // namespace

// ---------------------------------------------------------------------------

Json prepared_to_json(const PreparedData& prepared) {
  Json doc = dataset_to_json(prepared.data, prepared.split.seed);
  doc["train_fraction"] = prepared.train_fraction;
  doc["duplicate_groups"] = prepared.duplicate_groups;
  doc["split"] = split_to_json(prepared.split);
  Json config;
  config["feature_names"] = prepared.data.feature_names;
  config["n"] = prepared.data.n();
  config["train_fraction"] = prepared.train_fraction;
  doc.erase("meta");
  doc["meta"] = artifact_meta(prepared.split.seed, config);
  return doc;
}

PreparedData prepared_from_json(const Json& doc) {
  PreparedData p;
  p.data = dataset_from_json(doc);
  try {
    p.split = split_from_json(doc.at("split"));
    p.train_fraction = doc.at("train_fraction").get<double>();
    p.duplicate_groups = doc.value("duplicate_groups", std::size_t{0});
  } catch (const Json::exception& e) {
    throw IoError(std::string("dataset document has no usable split: ") +
                  e.what());
  }
  for (const auto* rows : {&p.split.train_rows, &p.split.test_rows}) {
    for (const auto r : *rows) {
      if (r >= p.data.n()) throw IoError("split row index out of range");
    }
  }
  return p;
}

PreparedData load_prepared(const fs::path& path) {
  return prepared_from_json(read_json_file(path));
}

std::string provenance_line(std::string_view kind, std::uint64_t seed,
                            const Json& config) {
  return "format_version=" + std::to_string(kFormatVersion) +
         " kind=" + std::string(kind) + " seed=" + std::to_string(seed) +
         " config_hash=" + config_hash(config);
}

ParamGrid default_grid(ModelVariant variant) {
  ParamGrid g;
  g.variant = variant;
  auto ints = [](std::initializer_list<int> v) {
    return std::vector<Json>(v.begin(), v.end());
  };
  auto reals = [](std::initializer_list<double> v) {
    return std::vector<Json>(v.begin(), v.end());
  };
  switch (variant) {
    case ModelVariant::kForest:
      g.axes = {{"n_estimators", ints({60, 220, 40})},
                {"max_depth", ints({7})},
                {"min_samples_split", ints({3})},
                {"max_features", {Json("auto")}}};
      break;
    case ModelVariant::kGbm:
      g.axes = {{"n_estimators", ints({10, 15, 19, 20, 21, 50, 100})},
                {"learning_rate", reals({0.1, 0.19, 0.2, 0.21, 0.8, 1.0})}};
      break;
    case ModelVariant::kXgb:
      g.axes = {{"gamma", ints({0})},
                {"learning_rate", reals({0.1, 0.01, 0.05})},
                {"max_depth", ints({2, 3, 4, 5, 6, 7, 8, 9})},
                {"n_estimators", ints({50, 60, 100, 140, 180})},
                {"subsample", reals({0.6, 0.7, 0.75, 0.8, 0.85, 0.9})}};
      break;
  }
  return g;
}

ParamGrid published_grid(ModelVariant variant) {
  ParamGrid g;
  g.variant = variant;
  const Json params = ModelSpec::published(variant).to_json();
  for (const auto& [key, value] : params.items()) {
    if (key == "seed") continue;
    g.axes.emplace_back(key, std::vector<Json>{value});
  }
  return g;
}

// ---------------------------------------------------------------------------

PreparedData run_ingest(const IngestOptions& options) {
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw ValidationError("train fraction must lie strictly between 0 and 1");
  }
  const auto records = load_csv(options.input);
  PreparedData p;
  p.data = derive_features(records);
  p.train_fraction = options.train_fraction;
  p.duplicate_groups = detect_duplicates(records).size();
  p.split = train_test_split(p.data.n(), options.train_fraction, options.seed);

  const Json doc = prepared_to_json(p);
  const Json& config = doc["meta"];
  const Dataset raw = raw_table(records);
  const fs::path& out = options.out;

  // Render everything before the first write so a bad input leaves no files.
  const std::string summary = summary_table_csv(
      summary_statistics(raw),
      provenance_line("summary_statistics", options.seed, config));
  const CorrelationMatrix corr = pearson_correlation(p.data, true);
  CsvBuilder corr_csv;
  corr_csv.comment(provenance_line("correlation", options.seed, config));
  std::vector<std::string> header = {"feature"};
  header.insert(header.end(), corr.names.begin(), corr.names.end());
  corr_csv.header(header);
  for (std::size_t i = 0; i < corr.names.size(); ++i) {
    std::vector<std::string> cells = {corr.names[i]};
    for (std::size_t j = 0; j < corr.names.size(); ++j) {
      cells.push_back(format_fixed(corr.r(i, j), 6));
    }
    corr_csv.row(cells);
  }
  const std::string heatmap = render(
      figure(FigureKind::kCorrelationHeatmap, "Pearson correlation", "", "",
             options.seed, config),
      corr);
  std::vector<std::pair<std::string, std::string>> boxes;
  for (const auto& name : present_boxplot_features(p.data)) {
    const std::size_t j = *p.data.feature_index(name);
    std::map<double, std::vector<double>> groups;
    for (std::size_t i = 0; i < p.data.n(); ++i) {
      groups[p.data.x(i, j)].push_back(p.data.y[i]);
    }
    std::vector<BoxGroup> data;
    for (auto& [value, ys] : groups) {
      data.push_back({format_group_value(value), std::move(ys)});
    }
    boxes.emplace_back(
        "boxplot_" + name + ".svg",
        render(figure(FigureKind::kGroupBoxplot, "PremiumPrice by " + name,
                      name, "PremiumPrice", options.seed, config),
               data));
  }

  write_json_file(out / "dataset.json", doc);
  write_file_atomic(out / "tables" / "table3_summary.csv", summary);
  write_file_atomic(out / "tables" / "correlation.csv", corr_csv.str());
  write_file_atomic(out / "figures" / "correlation_heatmap.svg", heatmap);
  for (const auto& [file, svg] : boxes) {
    write_file_atomic(out / "figures" / file, svg);
  }
  return p;
}

// ---------------------------------------------------------------------------

TrainOutcome train_prepared(const PreparedData& prepared,
                            const TrainOptions& options) {
  ModelSpec spec = ModelSpec::from_json(options.variant, options.params);
  spec.set_seed(options.seed);
  spec.validate();
  const Dataset train = prepared.train();
  const auto start = Clock::now();
  TrainOutcome outcome{fit_scaled_model(spec, train,
                                        ConstantColumns::kPassThrough,
                                        options.jobs),
                       spec, 0.0, 0.0};
  outcome.seconds = seconds_since(start);
  outcome.train_r2 = r_squared(train.y, outcome.model.predict(train.x));

  const std::string name = v_name(options.variant);
  const Json config = spec.to_json();
  Json run = meta_with_kind("run_report", options.seed, config);
  run["variant"] = name;
  run["params"] = config;
  run["seed"] = options.seed;
  run["train_rows"] = train.n();
  run["train_r2"] = outcome.train_r2;
  run["timing"] = "timings/train_" + name + ".json";
  run.erase("meta");
  run["meta"] = artifact_meta(options.seed, config);

  save_model(outcome.model, options.out / "models" / ("model_" + name + ".json"));
  write_json_file(options.out / "runs" / ("run_" + name + ".json"), run);
  write_timing(options.out, "train_" + name, outcome.seconds);
  return outcome;
}

TrainOutcome run_train(const TrainOptions& options) {
  return train_prepared(load_prepared(options.dataset), options);
}

// ---------------------------------------------------------------------------

CvResult tune_prepared(const PreparedData& prepared, const ParamGrid& grid,
                       const TuneOptions& options) {
  const Dataset train = prepared.train();
  const auto start = Clock::now();
  CvResult result =
      grid_search(train, grid, options.folds, options.seed, options.jobs);
  const double seconds = seconds_since(start);

  // Training score of the winning cell refit on the whole training split.
  ModelSpec best = grid.resolve(result.best_params);
  best.set_seed(options.seed);
  const Model model = fit_scaled_model(best, train,
                                       ConstantColumns::kPassThrough,
                                       options.jobs);
  const double train_r2 = r_squared(train.y, model.predict(train.x));

  const std::string name = v_name(grid.variant);
  Json doc = cv_result_to_json(result, grid);
  doc["best_train_r2"] = train_r2;
  Json grid_params = Json::object();
  for (const auto& [axis, values] : grid.axes) grid_params[axis] = values;
  const TuningRow row{std::string(variant_label(grid.variant)), train_r2,
                      describe_params(grid_params), result.best_mean_score,
                      describe_params(result.best_params)};
  const std::string table = tuning_table_csv(
      std::span(&row, 1), provenance_line("tuning", options.seed, grid.to_json()));

  write_json_file(options.out / "tuning" / ("cv_" + name + ".json"), doc);
  write_file_atomic(options.out / "tables" / ("table7_" + name + ".csv"), table);
  write_timing(options.out, "tune_" + name, seconds);
  return result;
}

CvResult run_tune(const TuneOptions& options) {
  const ParamGrid grid =
      options.grid ? ParamGrid::load(*options.grid) : default_grid(options.variant);
  if (grid.variant != options.variant) {
    throw ValidationError("grid is for '" + v_name(grid.variant) +
                          "' but --model is '" + v_name(options.variant) + "'");
  }
  return tune_prepared(load_prepared(options.dataset), grid, options);
}

// ---------------------------------------------------------------------------

MetricsReport evaluate_prepared(const PreparedData& prepared,
                                const Model& model, std::uint64_t seed,
                                const fs::path& out) {
  check_model_matches(model, prepared.data);
  const Dataset test = prepared.test();
  const std::vector<double> predicted = model.predict(test.x);
  const MetricsReport report = evaluate_metrics(test.y, predicted);
  const ResidualDiagnostics diag = residual_diagnostics(test.y, predicted);

  const ModelVariant variant = model.variant();
  const std::string name = v_name(variant);
  const std::string label(variant_label(variant));
  const Json config = model.config_json();
  Json doc = meta_with_kind("metrics", seed, config);
  doc["variant"] = name;
  doc["split"] = "test";
  doc["metrics"] = metrics_to_json(report, label);
  doc.erase("meta");
  doc["meta"] = artifact_meta(seed, config);

  const ModelMetricsRow row{label, report};
  const std::string table = metrics_table_csv(
      std::span(&row, 1), provenance_line("test_metrics", seed, config));
  const std::string residuals = render(
      figure(FigureKind::kResidualScatter, "Residuals (" + label + ")",
             "Predicted PremiumPrice", "Residual", seed, config),
      XyData{predicted, diag.residuals});
  const std::string qq = render(
      figure(FigureKind::kQq, "Normal Q-Q of residuals (" + label + ")",
             "Theoretical quantile", "Standardized residual", seed, config),
      diag.qq);
  const std::string pe = render(
      figure(FigureKind::kPredictionError, "Prediction error (" + label + ")",
             "Actual PremiumPrice", "Predicted PremiumPrice", seed, config),
      XyData{test.y, predicted});

  write_json_file(out / "metrics" / ("metrics_" + name + ".json"), doc);
  write_file_atomic(out / "tables" / ("table9_" + name + ".csv"), table);
  write_file_atomic(out / "figures" / ("residuals_" + name + ".svg"), residuals);
  write_file_atomic(out / "figures" / ("qq_" + name + ".svg"), qq);
  write_file_atomic(out / "figures" / ("prediction_error_" + name + ".svg"), pe);
  return report;
}

MetricsReport run_evaluate(const EvaluateOptions& options) {
  const Json model_doc = read_json_file(options.model);
  const Model model = model_from_json(model_doc);
  return evaluate_prepared(load_prepared(options.dataset), model,
                           model_seed_of(model_doc), options.out);
}

// ---------------------------------------------------------------------------

void explain_prepared(const PreparedData& prepared, const Model& model,
                      const ExplainOptions& options) {
  check_model_matches(model, prepared.data);
  if (!options.shap && !options.ice) {
    throw UsageError("nothing to explain: enable SHAP or ICE output");
  }
  const Dataset train = prepared.train();
  Dataset test = prepared.test();
  if (options.max_rows > 0 && options.max_rows < test.n()) {
    std::vector<std::size_t> head(options.max_rows);
    std::iota(head.begin(), head.end(), std::size_t{0});
    test = test.subset(head);
  }
  const PredictFn f = model.as_function();
  const ModelVariant variant = model.variant();
  const std::string name = v_name(variant);
  const std::string label(variant_label(variant));
  Json config = model.config_json();
  config["background_size"] = options.background_size;
  config["max_rows"] = options.max_rows;
  config["grid_points"] = options.grid_points;
  const std::uint64_t seed = options.seed;
  std::vector<std::pair<fs::path, std::string>> files;

  if (options.shap) {
    const Matrix background =
        select_background(train.x, options.background_size, seed);
    const ShapExplanation shap =
        shap_exact(f, test.x, background, test.feature_names, options.jobs);
    const GlobalImportance importance = global_importance(shap);
    files.emplace_back(fs::path("explain") / ("shap_" + name + ".csv"),
                       shap_csv(shap, provenance_line("shap", seed, config)));
    files.emplace_back(
        fs::path("explain") / ("importance_" + name + ".csv"),
        importance_csv(importance, provenance_line("importance", seed, config)));
    files.emplace_back(
        fs::path("figures") / ("beeswarm_" + name + ".svg"),
        render(figure(FigureKind::kBeeswarm, "SHAP summary (" + label + ")",
                      "SHAP value (impact on PremiumPrice)", "", seed, config),
               beeswarm_data(shap)));
    files.emplace_back(
        fs::path("figures") / ("importance_" + name + ".svg"),
        render(figure(FigureKind::kImportanceBar,
                      "Feature importance (" + label + ")", "mean |SHAP value|",
                      "", seed, config),
               importance));
  }

  if (options.ice) {
    std::vector<std::size_t> features;
    if (options.features.empty()) {
      features.resize(test.m());
      std::iota(features.begin(), features.end(), std::size_t{0});
    } else {
      for (const auto& feature : options.features) {
        const auto j = test.feature_index(feature);
        if (!j) throw ValidationError("unknown feature '" + feature + "'");
        features.push_back(*j);
      }
    }
    const bool all = !options.raw && !options.centered && !options.derivative;
    GridSpec grid_spec;
    grid_spec.points = options.grid_points;
    std::vector<IceCurveSet> sets;
    for (const std::size_t j : features) {
      // The grid spans the observed training range so every explained
      // row's curve shares it.
      const std::vector<double> grid = make_grid(train.x.column(j), grid_spec);
      const IceCurveSet raw =
          ice_curves(f, test.x, j, grid, test.feature_names[j]);
      if (all || options.raw) sets.push_back(raw);
      if (all || options.centered) sets.push_back(center_ice(raw, 0));
      if (all || options.derivative) {
        if (grid.size() >= 2) sets.push_back(derivative_ice(raw));
      }
    }
    files.emplace_back(fs::path("explain") / ("ice_" + name + ".csv"),
                       ice_csv(sets, provenance_line("ice", seed, config)));
    for (const auto& set : sets) {
      const std::string kind(ice_variant_name(set.variant));
      const std::string y_label = set.variant == IceVariant::kDerivative
                                      ? "d prediction / d " + set.feature_name
                                      : set.variant == IceVariant::kCentered
                                            ? "Centered prediction"
                                            : "Predicted PremiumPrice";
      files.emplace_back(
          fs::path("figures") /
              ("ice_" + name + "_" + set.feature_name + "_" + kind + ".svg"),
          render(figure(FigureKind::kIcePanel,
                        kind + " ICE: " + set.feature_name + " (" + label + ")",
                        set.feature_name, y_label, seed, config),
                 set));
    }
  }

  for (const auto& [path, contents] : files) {
    write_file_atomic(options.out / path, contents);
  }
}

void run_explain(const ExplainOptions& options) {
  const Model model = load_model(options.model);
  explain_prepared(load_prepared(options.dataset), model, options);
}

// ---------------------------------------------------------------------------

std::vector<std::string> reproduce_manifest(
    const std::vector<std::string>& feature_names) {
  std::set<std::string> files = {
      "dataset.json",
      "manifest.json",
      "tables/table3_summary.csv",
      "tables/correlation.csv",
      "tables/table7_tuning.csv",
      "tables/table8_improvement.csv",
      "tables/table9_test_metrics.csv",
      "figures/correlation_heatmap.svg",
  };
  for (const auto& name : boxplot_features()) {
    if (std::find(feature_names.begin(), feature_names.end(), name) !=
        feature_names.end()) {
      files.insert("figures/boxplot_" + name + ".svg");
    }
  }
  for (const ModelVariant v :
       {ModelVariant::kForest, ModelVariant::kGbm, ModelVariant::kXgb}) {
    const std::string n = v_name(v);
    for (const std::string& f : {
             "models/model_" + n + ".json", "runs/run_" + n + ".json",
             "tuning/cv_" + n + ".json", "tables/table7_" + n + ".csv",
             "metrics/metrics_" + n + ".json", "tables/table9_" + n + ".csv",
             "figures/residuals_" + n + ".svg", "figures/qq_" + n + ".svg",
             "figures/prediction_error_" + n + ".svg",
             "curves/learning_curve_" + n + ".csv",
             "figures/learning_curve_" + n + ".svg",
             "explain/shap_" + n + ".csv", "explain/importance_" + n + ".csv",
             "explain/ice_" + n + ".csv", "figures/beeswarm_" + n + ".svg",
             "figures/importance_" + n + ".svg"}) {
      files.insert(f);
    }
    for (const auto& feature : feature_names) {
      for (const char* kind : {"raw", "centered", "derivative"}) {
        files.insert("figures/ice_" + n + "_" + feature + "_" + kind + ".svg");
      }
    }
  }
  return {files.begin(), files.end()};
}

void run_reproduce(const ReproduceOptions& options) {
  const auto start = Clock::now();
  IngestOptions ingest;
  ingest.input = options.input;
  ingest.out = options.out;
  ingest.seed = options.seed;
  ingest.train_fraction = options.train_fraction;
  const PreparedData prepared = run_ingest(ingest);

  Json run_config;
  run_config["seed"] = options.seed;
  run_config["train_fraction"] = options.train_fraction;
  run_config["folds"] = options.folds;
  run_config["full_tune"] = options.full_tune;
  run_config["background_size"] = options.background_size;
  run_config["max_rows"] = options.max_rows;
  run_config["grid_points"] = options.grid_points;
  run_config["fractions"] = options.fractions;

  std::vector<TuningRow> tuning_rows;
  std::vector<ModelMetricsRow> metric_rows;
  std::vector<ModelScores> scores;
  Json timings = Json::object();

  for (const ModelVariant variant :
       {ModelVariant::kXgb, ModelVariant::kGbm, ModelVariant::kForest}) {
    const std::string name = v_name(variant);
    const std::string label(variant_label(variant));

    TuneOptions tune;
    tune.out = options.out;
    tune.variant = variant;
    tune.folds = options.folds;
    tune.seed = options.seed;
    tune.jobs = options.jobs;
    ParamGrid grid = published_grid(variant);
    if (options.full_tune) {
      grid = options.grid_dir
                 ? ParamGrid::load(*options.grid_dir / (name + ".json"))
                 : default_grid(variant);
    }
    auto t0 = Clock::now();
    const CvResult cv = tune_prepared(prepared, grid, tune);
    timings["tune_" + name] = seconds_since(t0);

    TrainOptions train;
    train.out = options.out;
    train.variant = variant;
    train.params = cv.best_params;
    train.seed = options.seed;
    train.jobs = options.jobs;
    t0 = Clock::now();
    const TrainOutcome trained = train_prepared(prepared, train);
    timings["train_" + name] = seconds_since(t0);

    Json grid_params = Json::object();
    for (const auto& [axis, values] : grid.axes) grid_params[axis] = values;
    tuning_rows.push_back({label, trained.train_r2, describe_params(grid_params),
                           cv.best_mean_score, describe_params(cv.best_params)});

    t0 = Clock::now();
    const MetricsReport report =
        evaluate_prepared(prepared, trained.model, options.seed, options.out);
    timings["evaluate_" + name] = seconds_since(t0);
    metric_rows.push_back({label, report});
    scores.push_back({label, trained.train_r2, cv.best_mean_score,
                      report.r_squared});

    t0 = Clock::now();
    const LearningCurve curve =
        learning_curve(prepared.train(), trained.spec, options.fractions,
                       options.folds, options.seed, options.jobs);
    Json curve_config = trained.spec.to_json();
    curve_config["fractions"] = options.fractions;
    curve_config["folds"] = options.folds;
    write_learning_curve(options.out, variant, curve, options.seed,
                         curve_config);
    timings["learning_curve_" + name] = seconds_since(t0);

    ExplainOptions explain;
    explain.out = options.out;
    explain.background_size = options.background_size;
    explain.max_rows = options.max_rows;
    explain.grid_points = options.grid_points;
    explain.seed = options.seed;
    explain.jobs = options.jobs;
    t0 = Clock::now();
    explain_prepared(prepared, trained.model, explain);
    timings["explain_" + name] = seconds_since(t0);
  }

  const std::vector<ImprovementRow> improvement = improvement_table(scores);
  write_file_atomic(options.out / "tables" / "table7_tuning.csv",
                    tuning_table_csv(tuning_rows, provenance_line(
                                                      "tuning", options.seed,
                                                      run_config)));
  write_file_atomic(options.out / "tables" / "table8_improvement.csv",
                    improvement_table_csv(improvement,
                                          provenance_line("improvement",
                                                          options.seed,
                                                          run_config)));
  write_file_atomic(options.out / "tables" / "table9_test_metrics.csv",
                    metrics_table_csv(metric_rows,
                                      provenance_line("test_metrics",
                                                      options.seed, run_config)));

  Json manifest = meta_with_kind("manifest", options.seed, run_config);
  Json files = Json::array();
  for (const auto& rel : reproduce_manifest(prepared.data.feature_names)) {
    if (rel == "manifest.json") continue;
    const fs::path path = options.out / rel;
    if (!fs::exists(path)) {
      throw IoError("expected artifact was not written: " + rel);
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_text_file(path))));
    files.push_back({{"path", rel}, {"fnv1a64", hash}});
  }
  manifest["files"] = std::move(files);
  Json meta = manifest["meta"];
  manifest.erase("meta");
  manifest["meta"] = meta;
  write_json_file(options.out / "manifest.json", manifest);

  timings["total"] = seconds_since(start);
  Json timing_doc;
  timing_doc["format_version"] = kFormatVersion;
  timing_doc["kind"] = "timing";
  timing_doc["name"] = "reproduce";
  timing_doc["wall_seconds"] = timings;
  write_json_file(options.out / "timings" / "reproduce.json", timing_doc);
}

}  // namespace premium
