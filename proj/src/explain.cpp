#include "premium/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "premium/error.hpp"
#include "premium/io.hpp"
#include "premium/parallel.hpp"
#include "premium/rng.hpp"

namespace premium {

namespace {

FeatureMask full_mask(std::size_t p) {
  return p >= 32 ? ~FeatureMask{0} : (FeatureMask{1} << p) - 1;
}

void check_background(const Matrix& background, std::size_t p) {
  if (background.rows() == 0) {
    throw ValidationError("the background set is empty");
  }
  if (background.cols() != p) {
    throw ValidationError("background has " +
                          std::to_string(background.cols()) +
                          " features, expected " + std::to_string(p));
  }
}

// Mean of f over hybrid rows; `scratch` has p slots. With `shortcut_full`
// off the full coalition is averaged like every other one, so a constant
// model yields identical values for all coalitions.
double coalition_value(const PredictFn& model, std::span<const double> row,
                       FeatureMask subset, const Matrix& background,
                       std::vector<double>& scratch,
                       bool shortcut_full = true) {
  const std::size_t p = row.size();
  if (shortcut_full && subset == full_mask(p)) return model(row);
  double sum = 0.0;
  for (std::size_t b = 0; b < background.rows(); ++b) {
    const auto base = background.row(b);
    for (std::size_t j = 0; j < p; ++j) {
      scratch[j] = (subset >> j) & 1U ? row[j] : base[j];
    }
    sum += model(scratch);
  }
  return sum / static_cast<double>(background.rows());
}

void finish_pdp(IceCurveSet& set) {
  const std::size_t g = set.grid.size();
  set.pdp.assign(g, 0.0);
  if (set.curves.rows() == 0) return;
  for (std::size_t k = 0; k < g; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < set.curves.rows(); ++i) sum += set.curves(i, k);
    set.pdp[k] = sum / static_cast<double>(set.curves.rows());
  }
}

}  // namespace

Matrix select_background(const Matrix& rows, std::size_t size,
                         std::uint64_t seed) {
  if (size == 0 || size >= rows.rows()) return rows;
  RandomStream stream(seed, StreamTag::kBackground);
  auto picked = stream.sample_without_replacement(rows.rows(), size);
  std::sort(picked.begin(), picked.end());
  return rows.select_rows(picked);
}

double shap_value_function(const PredictFn& model, std::span<const double> row,
                           FeatureMask subset, const Matrix& background) {
  check_background(background, row.size());
  if (row.size() > 32) throw ValidationError("too many features for a mask");
  if ((subset & ~full_mask(row.size())) != 0) {
    throw ValidationError("subset names a feature outside the row");
  }
  std::vector<double> scratch(row.size());
  return coalition_value(model, row, subset, background, scratch);
}

double shap_value_function(const PredictFn& model, std::span<const double> row,
                           std::span<const std::size_t> subset,
                           const Matrix& background) {
  FeatureMask mask = 0;
  for (const auto j : subset) {
    if (j >= row.size() || j >= 32) {
      throw ValidationError("subset feature index out of range");
    }
    mask |= FeatureMask{1} << j;
  }
  return shap_value_function(model, row, mask, background);
}

double shapley_weight(std::size_t p, std::size_t subset_size) {
  if (subset_size >= p) throw ValidationError("subset size must be < p");
  // 1 / (p * C(p-1, s))
  double binom = 1.0;
  for (std::size_t i = 1; i <= subset_size; ++i) {
    binom = binom * static_cast<double>(p - subset_size + i - 1) /
            static_cast<double>(i);
  }
  return 1.0 / (static_cast<double>(p) * binom);
}

ShapExplanation shap_exact(const PredictFn& model, const Matrix& rows,
                           const Matrix& background,
                           std::vector<std::string> feature_names,
                           std::size_t jobs) {
  const std::size_t p = rows.cols();
  if (p == 0) throw ValidationError("no features to explain");
  if (p > kMaxExactFeatures) {
    throw ValidationError("exact enumeration supports at most " +
                          std::to_string(kMaxExactFeatures) + " features, got " +
                          std::to_string(p));
  }
  check_background(background, p);
  if (feature_names.empty()) {
    for (std::size_t j = 0; j < p; ++j) {
      feature_names.push_back("x" + std::to_string(j));
    }
  }
  if (feature_names.size() != p) {
    throw ValidationError("feature name count does not match the rows");
  }

  const std::size_t coalitions = std::size_t{1} << p;
  std::vector<double> weight(p);
  for (std::size_t s = 0; s < p; ++s) weight[s] = shapley_weight(p, s);

  ShapExplanation out;
  out.feature_names = std::move(feature_names);
  out.phi = Matrix(rows.rows(), p);
  out.feature_values = rows;
  out.predictions.resize(rows.rows());
  {
    std::vector<double> scratch(p);
    const std::vector<double> probe(p, 0.0);
    out.base_value = coalition_value(model, probe, 0, background, scratch);
  }

  parallel_for(rows.rows(), jobs, [&](std::size_t i) {
    const auto row = rows.row(i);
    std::vector<double> scratch(p);
    std::vector<double> value(coalitions);
    value[0] = out.base_value;
    for (std::size_t mask = 1; mask < coalitions; ++mask) {
      value[mask] = coalition_value(model, row, static_cast<FeatureMask>(mask),
                                    background, scratch, false);
    }
    auto phi = out.phi.row(i);
    for (std::size_t mask = 0; mask < coalitions; ++mask) {
      const auto size =
          static_cast<std::size_t>(std::popcount(static_cast<FeatureMask>(mask)));
      if (size == p) continue;
      for (std::size_t j = 0; j < p; ++j) {
        if ((mask >> j) & 1U) continue;
        phi[j] += weight[size] * (value[mask | (std::size_t{1} << j)] -
                                  value[mask]);
      }
    }
    out.predictions[i] = model(row);
  });
  return out;
}

GlobalImportance global_importance(const ShapExplanation& explanation) {
  const Matrix& phi = explanation.phi;
  if (phi.rows() == 0) throw ValidationError("no attributions to summarize");
  GlobalImportance out;
  out.feature_names = explanation.feature_names;
  out.sum_abs.assign(phi.cols(), 0.0);
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    for (std::size_t j = 0; j < phi.cols(); ++j) {
      out.sum_abs[j] += std::abs(phi(i, j));
    }
  }
  out.mean_abs.resize(phi.cols());
  for (std::size_t j = 0; j < phi.cols(); ++j) {
    out.mean_abs[j] = out.sum_abs[j] / static_cast<double>(phi.rows());
  }
  out.ranking.resize(phi.cols());
  std::iota(out.ranking.begin(), out.ranking.end(), std::size_t{0});
  std::stable_sort(out.ranking.begin(), out.ranking.end(),
                   [&](std::size_t a, std::size_t b) {
                     return out.sum_abs[a] > out.sum_abs[b];
                   });
  return out;
}

std::vector<BeeswarmFeature> beeswarm_data(const ShapExplanation& explanation) {
  const GlobalImportance importance = global_importance(explanation);
  const Matrix& phi = explanation.phi;
  std::vector<BeeswarmFeature> out;
  for (const std::size_t j : importance.ranking) {
    BeeswarmFeature f;
    f.feature = j;
    f.name = explanation.feature_names[j];
    f.shap = phi.column(j);
    const std::vector<double> values = explanation.feature_values.column(j);
    std::vector<double> distinct = values;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    f.color.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (distinct.size() < 2) {
        f.color[i] = 0.5;
        continue;
      }
      const auto rank = static_cast<double>(
          std::lower_bound(distinct.begin(), distinct.end(), values[i]) -
          distinct.begin());
      f.color[i] = rank / static_cast<double>(distinct.size() - 1);
    }
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view ice_variant_name(IceVariant variant) {
  switch (variant) {
    case IceVariant::kRaw:
      return "raw";
    case IceVariant::kCentered:
      return "centered";
    case IceVariant::kDerivative:
      return "derivative";
  }
  return "raw";
}

std::vector<double> make_grid(std::span<const double> values,
                              const GridSpec& spec) {
  if (values.empty()) throw ValidationError("cannot build a grid from no values");
  std::vector<double> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const bool unique = spec.kind == GridSpec::Kind::kUnique ||
                      (spec.kind == GridSpec::Kind::kAuto &&
                       distinct.size() <= spec.max_unique);
  if (unique || distinct.size() == 1) return distinct;
  if (spec.points < 2) throw ValidationError("equispaced grid needs >= 2 points");
  const double lo = distinct.front();
  const double hi = distinct.back();
  std::vector<double> grid(spec.points);
  for (std::size_t k = 0; k < spec.points; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) /
                       static_cast<double>(spec.points - 1);
  }
  grid.back() = hi;
  return grid;
}

IceCurveSet ice_curves(const PredictFn& model, const Matrix& rows,
                       std::size_t feature, std::vector<double> grid,
                       std::string feature_name) {
  if (feature >= rows.cols()) {
    throw ValidationError("feature index " + std::to_string(feature) +
                          " out of range");
  }
  if (grid.empty()) throw ValidationError("ICE grid is empty");
  IceCurveSet set;
  set.feature = feature;
  set.feature_name = feature_name.empty() ? "x" + std::to_string(feature)
                                          : std::move(feature_name);
  set.grid = std::move(grid);
  set.curves = Matrix(rows.rows(), set.grid.size());
  std::vector<double> scratch(rows.cols());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto row = rows.row(i);
    std::copy(row.begin(), row.end(), scratch.begin());
    for (std::size_t k = 0; k < set.grid.size(); ++k) {
      scratch[feature] = set.grid[k];
      set.curves(i, k) = model(scratch);
    }
  }
  finish_pdp(set);
  return set;
}

IceCurveSet ice_curves(const PredictFn& model, const Matrix& rows,
                       std::size_t feature, const GridSpec& spec,
                       std::string feature_name) {
  if (feature >= rows.cols()) {
    throw ValidationError("feature index " + std::to_string(feature) +
                          " out of range");
  }
  return ice_curves(model, rows, feature, make_grid(rows.column(feature), spec),
                    std::move(feature_name));
}

IceCurveSet center_ice(const IceCurveSet& curves, std::size_t anchor) {
  if (curves.variant == IceVariant::kDerivative) {
    throw ValidationError("derivative curves cannot be centered");
  }
  if (anchor >= curves.grid.size()) {
    throw ValidationError("anchor position " + std::to_string(anchor) +
                          " is outside the grid");
  }
  IceCurveSet out = curves;
  out.variant = IceVariant::kCentered;
  out.anchor = anchor;
  for (std::size_t i = 0; i < out.curves.rows(); ++i) {
    const double at_anchor = curves.curves(i, anchor);
    for (std::size_t k = 0; k < out.grid.size(); ++k) {
      out.curves(i, k) = curves.curves(i, k) - at_anchor;
    }
  }
  finish_pdp(out);
  return out;
}

IceCurveSet derivative_ice(const IceCurveSet& curves) {
  const std::size_t g = curves.grid.size();
  if (g < 2) throw ValidationError("derivative curves need >= 2 grid points");
  IceCurveSet out = curves;
  out.variant = IceVariant::kDerivative;
  const auto& x = curves.grid;
  for (std::size_t i = 0; i < curves.curves.rows(); ++i) {
    const auto c = curves.curves.row(i);
    out.curves(i, 0) = (c[1] - c[0]) / (x[1] - x[0]);
    for (std::size_t k = 1; k + 1 < g; ++k) {
      out.curves(i, k) = (c[k + 1] - c[k - 1]) / (x[k + 1] - x[k - 1]);
    }
    out.curves(i, g - 1) = (c[g - 1] - c[g - 2]) / (x[g - 1] - x[g - 2]);
  }
  finish_pdp(out);
  return out;
}

std::vector<double> curve_spread(const IceCurveSet& curves) {
  std::vector<double> spread(curves.grid.size(), 0.0);
  if (curves.curves.rows() == 0) return spread;
  for (std::size_t k = 0; k < curves.grid.size(); ++k) {
    double lo = curves.curves(0, k);
    double hi = lo;
    for (std::size_t i = 1; i < curves.curves.rows(); ++i) {
      lo = std::min(lo, curves.curves(i, k));
      hi = std::max(hi, curves.curves(i, k));
    }
    spread[k] = hi - lo;
  }
  return spread;
}

// ---------------------------------------------------------------------------

std::string shap_csv(const ShapExplanation& explanation,
                     std::string_view provenance) {
  CsvBuilder csv;
  csv.comment(provenance);
  std::vector<std::string> header = {"row_id"};
  for (const auto& name : explanation.feature_names) header.push_back(name);
  header.push_back("base_value");
  header.push_back("prediction");
  csv.header(header);
  for (std::size_t i = 0; i < explanation.phi.rows(); ++i) {
    std::vector<std::string> cells = {std::to_string(i)};
    for (std::size_t j = 0; j < explanation.phi.cols(); ++j) {
      cells.push_back(format_exact(explanation.phi(i, j)));
    }
    cells.push_back(format_exact(explanation.base_value));
    cells.push_back(format_exact(explanation.predictions[i]));
    csv.row(cells);
  }
  return csv.str();
}

std::string importance_csv(const GlobalImportance& importance,
                           std::string_view provenance) {
  CsvBuilder csv;
  csv.comment(provenance);
  csv.header({"rank", "feature", "sum_abs_shap", "mean_abs_shap"});
  for (std::size_t r = 0; r < importance.ranking.size(); ++r) {
    const std::size_t j = importance.ranking[r];
    csv.row({std::to_string(r + 1), importance.feature_names[j],
             format_exact(importance.sum_abs[j]),
             format_exact(importance.mean_abs[j])});
  }
  return csv.str();
}

std::string ice_csv(std::span<const IceCurveSet> sets,
                    std::string_view provenance) {
  CsvBuilder csv;
  csv.comment(provenance);
  csv.header({"feature", "row_id", "grid_value", "prediction", "variant"});
  for (const auto& set : sets) {
    const std::string variant(ice_variant_name(set.variant));
    for (std::size_t i = 0; i < set.curves.rows(); ++i) {
      for (std::size_t k = 0; k < set.grid.size(); ++k) {
        csv.row({set.feature_name, std::to_string(i),
                 format_exact(set.grid[k]), format_exact(set.curves(i, k)),
                 variant});
      }
    }
    for (std::size_t k = 0; k < set.grid.size(); ++k) {
      csv.row({set.feature_name, "pdp", format_exact(set.grid[k]),
               format_exact(set.pdp[k]), variant});
    }
  }
  return csv.str();
}

}  // namespace premium
