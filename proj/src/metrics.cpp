#include "premium/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "premium/dataset.hpp"
#include "premium/error.hpp"

namespace premium {

namespace {

void check_pair(std::span<const double> actual,
                std::span<const double> predicted, std::size_t min_size) {
  if (actual.size() != predicted.size()) {
    throw ValidationError("actual has " + std::to_string(actual.size()) +
                          " values but predicted has " +
                          std::to_string(predicted.size()));
  }
  if (actual.size() < min_size) {
    throw ValidationError("metric needs at least " + std::to_string(min_size) +
                          " values");
  }
}

}  // namespace

double r_squared(std::span<const double> actual,
                 std::span<const double> predicted) {
  check_pair(actual, predicted, 2);
  double mean = 0.0;
  for (const double y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = actual[i] - predicted[i];
    const double d = actual[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }
  if (ss_tot == 0.0) {
    throw NumericError("R^2 undefined: actual values are constant");
  }
  return 1.0 - ss_res / ss_tot;
}

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sum += std::abs(actual[i] - predicted[i]);
  }
  return sum / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = actual[i] - predicted[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double mape(std::span<const double> actual, std::span<const double> predicted) {
  check_pair(actual, predicted, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] == 0.0) {
      throw NumericError("MAPE undefined: actual value at index " +
                         std::to_string(i) + " is zero");
    }
    sum += std::abs((actual[i] - predicted[i]) / actual[i]);
  }
  return 100.0 * sum / static_cast<double>(actual.size());
}

MetricsReport evaluate_metrics(std::span<const double> actual,
                               std::span<const double> predicted) {
  MetricsReport r;
  r.r_squared = r_squared(actual, predicted);
  r.mae = mae(actual, predicted);
  r.rmse = rmse(actual, predicted);
  r.mape = mape(actual, predicted);
  r.n = actual.size();
  return r;
}

Json metrics_to_json(const MetricsReport& report, std::string_view model) {
  Json out;
  out["model"] = std::string(model);
  out["r_squared"] = report.r_squared;
  out["r_squared_percent"] = 100.0 * report.r_squared;
  out["mae"] = report.mae;
  out["rmse"] = report.rmse;
  out["mape_percent"] = report.mape;
  out["n"] = report.n;
  return out;
}

ResidualDiagnostics residual_diagnostics(std::span<const double> actual,
                                         std::span<const double> predicted) {
  check_pair(actual, predicted, 3);
  ResidualDiagnostics d;
  d.residuals.resize(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    d.residuals[i] = actual[i] - predicted[i];
  }
  const double sd = sample_stddev(d.residuals);
  if (sd == 0.0) {
    throw NumericError("residuals have zero variance");
  }
  double mean = 0.0;
  for (const double r : d.residuals) mean += r;
  mean /= static_cast<double>(d.residuals.size());
  d.standardized.resize(d.residuals.size());
  for (std::size_t i = 0; i < d.residuals.size(); ++i) {
    d.standardized[i] = (d.residuals[i] - mean) / sd;
  }
  std::vector<double> sorted = d.standardized;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  d.qq.resize(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    d.qq[i] = {normal_quantile(p), sorted[i]};
  }
  return d;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ValidationError("normal quantile needs p in (0, 1)");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  constexpr double p_high = 1.0 - p_low;

  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= p_high) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley step against the exact CDF.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u =
      e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace premium
