#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "premium/dataset.hpp"
#include "premium/explain.hpp"
#include "premium/io.hpp"
#include "premium/metrics.hpp"
#include "premium/tuning.hpp"

namespace premium {

enum class FigureKind {
  kCorrelationHeatmap,
  kGroupBoxplot,
  kLearningCurve,
  kResidualScatter,
  kQq,
  kPredictionError,
  kBeeswarm,
  kImportanceBar,
  kIcePanel,
};

std::string_view figure_kind_name(FigureKind kind);

struct FigureSpec {
  FigureKind kind = FigureKind::kPredictionError;
  std::string title;
  std::string x_label;
  std::string y_label;
  Json meta;  // provenance, written into <metadata> when present
};

struct BoxGroup {
  std::string label;
  std::vector<double> values;
};

struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest value >= q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest value <= q3 + 1.5 IQR
  std::vector<double> outliers;
};

BoxStats box_stats(std::span<const double> values);

// Paired coordinates: (predicted, residual) for residual scatter and
// (actual, predicted) for prediction error.
struct XyData {
  std::vector<double> x;
  std::vector<double> y;
};

using FigureData =
    std::variant<CorrelationMatrix, std::vector<BoxGroup>, LearningCurve,
                 XyData, std::vector<QqPoint>, std::vector<BeeswarmFeature>,
                 GlobalImportance, IceCurveSet>;

// Validates that `data` has the shape `spec.kind` needs, then renders a
// self-contained SVG. Output bytes depend only on the inputs.
std::string render(const FigureSpec& spec, const FigureData& data);

// Renders fully before touching the filesystem.
void write_figure(const std::filesystem::path& path, const FigureSpec& spec,
                  const FigureData& data);

// Closed interval covered by the beeswarm x axis.
std::pair<double, double> beeswarm_axis_range(
    std::span<const BeeswarmFeature> features);

// Vertical offsets (in units of one dot diameter) for a row of points:
// points sharing a horizontal bin stack outward from the centre line.
std::vector<double> swarm_offsets(std::span<const double> pixel_x,
                                  double bin_width);

std::string xml_escape(std::string_view text);

// ---------------------------------------------------------------------------
// Tables

struct ModelMetricsRow {
  std::string model;
  MetricsReport metrics;
};

struct TuningRow {
  std::string model;
  double train_r2 = 0.0;  // fraction
  std::string tuning_parameters;
  double cv_r2 = 0.0;     // fraction
  std::string best_parameters;
};

// Features, Mean, STD, Min, Q1, Median, Q3, Max; two decimals.
std::string summary_table_csv(const SummaryStats& stats,
                              std::string_view provenance);
// Model, R2, MAE, RMSE, MAPE; R2 in percent; three decimals.
std::string metrics_table_csv(std::span<const ModelMetricsRow> rows,
                              std::string_view provenance);
// Model, TrainR2, TuningParameters, CvR2, BestParameters.
std::string tuning_table_csv(std::span<const TuningRow> rows,
                             std::string_view provenance);
// Model, TrainR2, CvR2, TestR2, Improvement; percent, three decimals.
std::string improvement_table_csv(std::span<const ImprovementRow> rows,
                                  std::string_view provenance);

// Compact "name: value" rendering of a parameter object for table cells.
std::string describe_params(const Json& params);

}  // namespace premium
