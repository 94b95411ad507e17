#pragma once

#include <cstddef>
#include <span>

namespace windreg {

/// Mean absolute error, kW.
double mae(std::span<const double> actual, std::span<const double> predicted);

/// Root mean squared error, kW.
double rmse(std::span<const double> actual, std::span<const double> predicted);

/// Explained-to-total sum-of-squares ratio, sum (yhat - ybar)^2 / sum (y - ybar)^2.
/// Equals r2_score for least-squares fits on their own training data; may
/// exceed 1 for other predictors.
double r2_ratio(std::span<const double> actual, std::span<const double> predicted);

/// Coefficient of determination 1 - SSres/SStot.
double r2_score(std::span<const double> actual, std::span<const double> predicted);

struct ScorePair {
  double mae = 0.0;
  double r2_ratio = 0.0;
  double r2_score = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

ScorePair score(std::span<const double> actual, std::span<const double> predicted);

enum class Metric { R2Score, R2Ratio, Mae, Rmse };

double evaluate_metric(Metric metric, std::span<const double> actual, std::span<const double> predicted);

}  // namespace windreg
