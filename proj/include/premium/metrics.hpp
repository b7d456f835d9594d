#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "premium/io.hpp"

namespace premium {

// Coefficient of determination as a fraction; 1 is perfect, may be negative.
double r_squared(std::span<const double> actual,
                 std::span<const double> predicted);
double mae(std::span<const double> actual, std::span<const double> predicted);
double rmse(std::span<const double> actual, std::span<const double> predicted);
// Percent. Any zero actual value is an error rather than a skipped row.
double mape(std::span<const double> actual, std::span<const double> predicted);

struct MetricsReport {
  double r_squared = 0.0;  // fraction; tables print percent
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  // percent
  std::size_t n = 0;
};

MetricsReport evaluate_metrics(std::span<const double> actual,
                               std::span<const double> predicted);

Json metrics_to_json(const MetricsReport& report, std::string_view model);

struct QqPoint {
  double theoretical = 0.0;  // standard normal quantile at (i - 0.5) / n
  double sample = 0.0;       // i-th smallest standardized residual
};

struct ResidualDiagnostics {
  std::vector<double> residuals;     // actual - predicted, input order
  std::vector<double> standardized;  // (r - mean) / sample stddev
  std::vector<QqPoint> qq;
};

ResidualDiagnostics residual_diagnostics(std::span<const double> actual,
                                         std::span<const double> predicted);

// Inverse standard normal CDF for p in (0, 1): Acklam's rational
// approximation followed by one Halley refinement step.
double normal_quantile(double p);

}  // namespace premium
