#include "windreg/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "windreg/error.hpp"

namespace windreg {

namespace {

void check_lengths(std::span<const double> actual, std::span<const double> predicted,
                   std::size_t min_len) {
  if (actual.size() != predicted.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} actual values but {} predictions", actual.size(), predicted.size()));
  if (actual.size() < min_len)
    throw Error(ErrorCode::EmptyInput, fmt::format("need at least {} values, got {}", min_len, actual.size()));
}

struct SumsOfSquares {
  double total = 0.0;
  double explained = 0.0;
  double residual = 0.0;
};

SumsOfSquares sums_of_squares(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, 2);
  double mean = 0.0;
  for (double y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  SumsOfSquares ss;
  for (std::size_t j = 0; j < actual.size(); ++j) {
    ss.total += (actual[j] - mean) * (actual[j] - mean);
    ss.explained += (predicted[j] - mean) * (predicted[j] - mean);
    ss.residual += (actual[j] - predicted[j]) * (actual[j] - predicted[j]);
  }
  if (ss.total == 0.0) throw Error(ErrorCode::ConstantActual, "actual values are constant");
  return ss;
}

}  // namespace

double mae(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < actual.size(); ++j) sum += std::abs(actual[j] - predicted[j]);
  return sum / static_cast<double>(actual.size());
}

double rmse(std::span<const double> actual, std::span<const double> predicted) {
  check_lengths(actual, predicted, 1);
  double sum = 0.0;
  for (std::size_t j = 0; j < actual.size(); ++j) {
    const double e = actual[j] - predicted[j];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

double r2_ratio(std::span<const double> actual, std::span<const double> predicted) {
  const auto ss = sums_of_squares(actual, predicted);
  return ss.explained / ss.total;
}

double r2_score(std::span<const double> actual, std::span<const double> predicted) {
  const auto ss = sums_of_squares(actual, predicted);
  return 1.0 - ss.residual / ss.total;
}

ScorePair score(std::span<const double> actual, std::span<const double> predicted) {
  ScorePair s;
  s.mae = mae(actual, predicted);
  s.rmse = rmse(actual, predicted);
  s.r2_ratio = r2_ratio(actual, predicted);
  s.r2_score = r2_score(actual, predicted);
  s.n = actual.size();
  return s;
}

double evaluate_metric(Metric metric, std::span<const double> actual, std::span<const double> predicted) {
  switch (metric) {
    case Metric::R2Score:
      return r2_score(actual, predicted);
    case Metric::R2Ratio:
      return r2_ratio(actual, predicted);
    case Metric::Mae:
      return mae(actual, predicted);
    case Metric::Rmse:
      return rmse(actual, predicted);
  }
  return 0.0;
}

}  // namespace windreg
