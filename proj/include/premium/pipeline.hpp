#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "premium/dataset.hpp"
#include "premium/ensemble.hpp"
#include "premium/io.hpp"
#include "premium/metrics.hpp"
#include "premium/tuning.hpp"

namespace premium {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kDefaultSeed = 42;
inline constexpr double kDefaultTrainFraction = 0.75;

// Features plus the train/test partition they were split into.
struct PreparedData {
  Dataset data;
  SplitIndices split;
  double train_fraction = kDefaultTrainFraction;
  std::size_t duplicate_groups = 0;

  Dataset train() const { return data.subset(split.train_rows); }
  Dataset test() const { return data.subset(split.test_rows); }
};

Json prepared_to_json(const PreparedData& prepared);
PreparedData prepared_from_json(const Json& doc);
PreparedData load_prepared(const fs::path& path);

// "# format_version=1 kind=... seed=... config_hash=..." for CSV headers.
std::string provenance_line(std::string_view kind, std::uint64_t seed,
                            const Json& config);

// Built-in copies of the shipped grids/<variant>.json files.
ParamGrid default_grid(ModelVariant variant);
// One cell holding the published parameters, for CV scoring without search.
ParamGrid published_grid(ModelVariant variant);

// ---------------------------------------------------------------------------
// Commands. Every command writes below `out` using the fixed layout listed by
// reproduce_manifest().

struct IngestOptions {
  fs::path input;
  fs::path out;
  std::uint64_t seed = kDefaultSeed;
  double train_fraction = kDefaultTrainFraction;
};

// dataset.json, tables/table3_summary.csv, tables/correlation.csv,
// figures/correlation_heatmap.svg, figures/boxplot_<feature>.svg
PreparedData run_ingest(const IngestOptions& options);

struct TrainOptions {
  fs::path dataset;
  fs::path out;
  ModelVariant variant = ModelVariant::kForest;
  Json params = Json::object();  // overrides on top of the published values
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 1;
};

struct TrainOutcome {
  Model model;
  ModelSpec spec;
  double train_r2 = 0.0;
  double seconds = 0.0;
};

// models/model_<v>.json, runs/run_<v>.json, timings/train_<v>.json
TrainOutcome run_train(const TrainOptions& options);
TrainOutcome train_prepared(const PreparedData& prepared,
                            const TrainOptions& options);

struct TuneOptions {
  fs::path dataset;
  fs::path out;
  ModelVariant variant = ModelVariant::kForest;
  std::optional<fs::path> grid;  // default_grid(variant) when absent
  std::size_t folds = 5;
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 1;
};

// tuning/cv_<v>.json, tables/table7_<v>.csv, timings/tune_<v>.json
CvResult run_tune(const TuneOptions& options);
CvResult tune_prepared(const PreparedData& prepared, const ParamGrid& grid,
                       const TuneOptions& options);

struct EvaluateOptions {
  fs::path model;
  fs::path dataset;
  fs::path out;
};

// metrics/metrics_<v>.json, tables/table9_<v>.csv, figures/residuals_<v>.svg,
// figures/qq_<v>.svg, figures/prediction_error_<v>.svg
MetricsReport run_evaluate(const EvaluateOptions& options);
MetricsReport evaluate_prepared(const PreparedData& prepared,
                                const Model& model, std::uint64_t seed,
                                const fs::path& out);

struct ExplainOptions {
  fs::path model;
  fs::path dataset;
  fs::path out;
  bool shap = true;
  bool ice = true;
  std::size_t background_size = 0;  // 0: the whole training split
  std::size_t max_rows = 0;         // 0: every test row
  std::vector<std::string> features;  // ICE features; empty: all
  bool raw = false;         // ICE variants; none selected means all three
  bool centered = false;
  bool derivative = false;
  std::size_t grid_points = 30;
  std::uint64_t seed = kDefaultSeed;
  std::size_t jobs = 1;
};

// explain/shap_<v>.csv, explain/importance_<v>.csv, figures/beeswarm_<v>.svg,
// figures/importance_<v>.svg, explain/ice_<v>.csv,
// figures/ice_<v>_<feature>_<variant>.svg
void run_explain(const ExplainOptions& options);
void explain_prepared(const PreparedData& prepared, const Model& model,
                      const ExplainOptions& options);

struct ReproduceOptions {
  fs::path input;
  fs::path out;
  std::uint64_t seed = kDefaultSeed;
  double train_fraction = kDefaultTrainFraction;
  std::size_t folds = 5;
  bool full_tune = false;
  std::optional<fs::path> grid_dir;  // grids/<v>.json used with full_tune
  std::size_t background_size = 100;
  std::size_t max_rows = 0;
  std::size_t grid_points = 30;
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5,
                                   0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t jobs = 1;
};

// The whole workflow into `out`, then manifest.json.
void run_reproduce(const ReproduceOptions& options);

// Relative paths written by reproduce, sorted; timings/ is excluded since
// wall-clock values differ between runs.
std::vector<std::string> reproduce_manifest(
    const std::vector<std::string>& feature_names);

}  // namespace premium
