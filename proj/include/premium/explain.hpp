#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "premium/ensemble.hpp"
#include "premium/matrix.hpp"

namespace premium {

// Bit j set means feature j is taken from the explained row.
using FeatureMask = std::uint32_t;

// Subset enumeration visits 2^p coalitions per explained row.
inline constexpr std::size_t kMaxExactFeatures = 20;

// Deterministic subsample (sorted row order) of at most `size` rows; all
// rows when size is 0 or not smaller than the matrix.
Matrix select_background(const Matrix& rows, std::size_t size,
                         std::uint64_t seed);

// Interventional value function: mean over background rows b of f(z) where
// z copies the explained row on `subset` and b elsewhere. The full set
// returns f(row) itself.
double shap_value_function(const PredictFn& model, std::span<const double> row,
                           FeatureMask subset, const Matrix& background);
double shap_value_function(const PredictFn& model, std::span<const double> row,
                           std::span<const std::size_t> subset,
                           const Matrix& background);

// |S|! (p - |S| - 1)! / p!
double shapley_weight(std::size_t p, std::size_t subset_size);

struct ShapExplanation {
  std::vector<std::string> feature_names;
  double base_value = 0.0;       // mean prediction over the background
  Matrix phi;                    // explained rows x features
  Matrix feature_values;         // the explained rows themselves
  std::vector<double> predictions;
};

// Exact attribution by enumerating every coalition; value-function results
// are cached per coalition so each row costs 2^p background sweeps.
ShapExplanation shap_exact(const PredictFn& model, const Matrix& rows,
                           const Matrix& background,
                           std::vector<std::string> feature_names,
                           std::size_t jobs = 1);

struct GlobalImportance {
  std::vector<std::string> feature_names;
  std::vector<double> sum_abs;   // I_j = sum_i |phi_ij|
  std::vector<double> mean_abs;  // I_j / n
  std::vector<std::size_t> ranking;  // feature indices, most important first
};

GlobalImportance global_importance(const ShapExplanation& explanation);

struct BeeswarmFeature {
  std::size_t feature = 0;
  std::string name;
  std::vector<double> shap;
  // Dense rank of the feature value among distinct values, scaled to [0, 1];
  // 0.5 when the column has a single distinct value.
  std::vector<double> color;
};

// Features in importance order.
std::vector<BeeswarmFeature> beeswarm_data(const ShapExplanation& explanation);

// ---------------------------------------------------------------------------
// ICE / PDP

enum class IceVariant { kRaw, kCentered, kDerivative };
std::string_view ice_variant_name(IceVariant variant);

struct GridSpec {
  enum class Kind { kAuto, kEquispaced, kUnique };
  Kind kind = Kind::kAuto;
  std::size_t points = 30;      // equispaced grid size
  std::size_t max_unique = 10;  // auto: unique values when at most this many
};

// Auto picks the sorted distinct values for low-cardinality columns and an
// equispaced grid over [min, max] otherwise.
std::vector<double> make_grid(std::span<const double> values,
                              const GridSpec& spec);

struct IceCurveSet {
  std::size_t feature = 0;
  std::string feature_name;
  std::vector<double> grid;
  Matrix curves;            // one row per explained row, one column per grid point
  std::vector<double> pdp;  // pointwise mean over curves
  IceVariant variant = IceVariant::kRaw;
  std::optional<std::size_t> anchor;  // grid position used for centering
};

IceCurveSet ice_curves(const PredictFn& model, const Matrix& rows,
                       std::size_t feature, std::vector<double> grid,
                       std::string feature_name = {});
IceCurveSet ice_curves(const PredictFn& model, const Matrix& rows,
                       std::size_t feature, const GridSpec& spec,
                       std::string feature_name = {});

// Subtracts each curve's own value at grid position `anchor`.
IceCurveSet center_ice(const IceCurveSet& curves, std::size_t anchor = 0);

// Central differences inside the grid, one-sided at the two ends.
IceCurveSet derivative_ice(const IceCurveSet& curves);

// max - min across curves at each grid point.
std::vector<double> curve_spread(const IceCurveSet& curves);

// ---------------------------------------------------------------------------
// CSV exports. `provenance` becomes a leading comment line.

std::string shap_csv(const ShapExplanation& explanation,
                     std::string_view provenance);
std::string importance_csv(const GlobalImportance& importance,
                           std::string_view provenance);
// Long format: row_id, grid_value, prediction, variant; the PDP uses row_id
// "pdp".
std::string ice_csv(std::span<const IceCurveSet> sets,
                    std::string_view provenance);

}  // namespace premium
