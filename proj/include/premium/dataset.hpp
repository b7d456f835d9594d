#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "premium/io.hpp"
#include "premium/matrix.hpp"

namespace premium {

// Header of the insurance CSV, in file order.
inline constexpr std::array<std::string_view, 11> kCsvColumns = {
    "Age",
    "Diabetes",
    "BloodPressureProblems",
    "AnyTransplants",
    "AnyChronicDiseases",
    "Height",
    "Weight",
    "KnownAllergies",
    "HistoryOfCancerInFamily",
    "NumberOfMajorSurgeries",
    "PremiumPrice",
};

// Model inputs after BMI replaces Height and Weight.
inline constexpr std::array<std::string_view, 9> kModelFeatures = {
    "Age",
    "Diabetes",
    "BloodPressureProblems",
    "AnyTransplants",
    "AnyChronicDiseases",
    "BMI",
    "KnownAllergies",
    "HistoryOfCancerInFamily",
    "NumberOfMajorSurgeries",
};

inline constexpr std::string_view kTargetName = "PremiumPrice";

// One row of the insurance CSV. Flags are exactly 0 or 1.
struct RawRecord {
  int age = 0;
  int diabetes = 0;
  int blood_pressure_problems = 0;
  int any_transplants = 0;
  int any_chronic_diseases = 0;
  double height_cm = 0.0;
  double weight_kg = 0.0;
  int known_allergies = 0;
  int history_of_cancer_in_family = 0;
  int number_of_major_surgeries = 0;
  double premium_price = 0.0;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
  friend auto operator<=>(const RawRecord&, const RawRecord&) = default;
};

// Feature matrix, target vector and column names.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix x;
  std::vector<double> y;
  std::string target_name{kTargetName};

  std::size_t n() const noexcept { return x.rows(); }
  std::size_t m() const noexcept { return x.cols(); }

  // Throws ValidationError if the shape invariants do not hold.
  void validate() const;
  std::optional<std::size_t> feature_index(std::string_view name) const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

std::vector<RawRecord> parse_insurance_csv(std::string_view text,
                                           std::string_view source = "<input>");
std::vector<RawRecord> load_csv(const std::filesystem::path& path);

// Groups (ascending row indices, at least two per group) of rows whose
// full content is identical. Groups are ordered by their first index.
std::vector<std::vector<std::size_t>> detect_duplicates(
    std::span<const RawRecord> records);

double body_mass_index(double weight_kg, double height_cm);

// Model-ready matrix: BMI replaces Height/Weight, y is PremiumPrice.
Dataset derive_features(std::span<const RawRecord> records);

// The ten raw input columns with PremiumPrice as target, for the summary table.
Dataset raw_table(std::span<const RawRecord> records);

// ---------------------------------------------------------------------------
// Standardization

enum class ConstantColumns {
  kReject,       // constant columns are a validation error
  kPassThrough,  // constant columns are left unscaled (mean 0, std 1)
};

// Per-feature mean and sample standard deviation (n-1 denominator).
struct ScalerState {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t size() const noexcept { return mean.size(); }
  void transform(std::span<const double> in, std::span<double> out) const;
  void inverse(std::span<const double> in, std::span<double> out) const;

  friend bool operator==(const ScalerState&, const ScalerState&) = default;
};

ScalerState fit_scaler(const Dataset& data, std::span<const std::size_t> rows,
                       ConstantColumns policy = ConstantColumns::kReject);
Dataset apply_scaler(const ScalerState& state, const Dataset& data);
Matrix invert_scaler(const ScalerState& state, const Matrix& scaled);

// ---------------------------------------------------------------------------
// Splitting

struct SplitIndices {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::uint64_t seed = 0;
};

// round-half-up of fraction * n
std::size_t split_train_size(std::size_t n, double fraction);
SplitIndices train_test_split(std::size_t n, double fraction,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Descriptive statistics

struct ColumnSummary {
  std::string name;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); 0 for a single value
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

struct SummaryStats {
  std::vector<ColumnSummary> columns;  // features first, target last
};

// Linear interpolation at position p*(n-1) of the sorted sample.
double quantile_linear(std::span<const double> sorted, double p);
double sample_stddev(std::span<const double> values);
ColumnSummary summarize_column(std::string name,
                               std::span<const double> values);
SummaryStats summary_statistics(const Dataset& data);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Matrix r;
};

double pearson(std::span<const double> a, std::span<const double> b);
CorrelationMatrix pearson_correlation(const Dataset& data,
                                      bool include_target = true);

struct GroupStats {
  double value = 0.0;      // the grouping feature's value
  ColumnSummary premium;   // target statistics within the group
};

// Target statistics per distinct value of a (small-cardinality) feature,
// ascending by value.
std::vector<GroupStats> group_summary(const Dataset& data,
                                      std::string_view feature);

// ---------------------------------------------------------------------------
// Documents

Json dataset_to_json(const Dataset& data, std::uint64_t seed);
Dataset dataset_from_json(const Json& doc);
Json scaler_to_json(const ScalerState& state);
ScalerState scaler_from_json(const Json& doc);
Json split_to_json(const SplitIndices& split);
SplitIndices split_from_json(const Json& doc);

}  // namespace premium
