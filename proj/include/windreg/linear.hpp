#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "windreg/matrix.hpp"

namespace windreg {

/// Multiple linear regression y = b0 + sum_k b_k x_k.
struct LinearModel {
  double intercept = 0.0;
  std::vector<double> slopes;
  double residual_std = 0.0;  // sqrt(SSres / (n - p - 1)); 0 when n == p + 1

  std::size_t feature_count() const noexcept { return slopes.size(); }

  friend bool operator==(const LinearModel&, const LinearModel&) = default;
};

/// Relative tolerance for the rank check, scaled by the largest column norm
/// of the intercept-augmented design matrix.
inline constexpr double kRankTolerance = 1e-10;

/// Ordinary least squares via Householder QR of [1 | X]. Throws
/// TooFewRows when n < p + 1, RankDeficient naming the first column that is
/// linearly dependent on the columns before it.
LinearModel fit_linear(const Matrix& features, std::span<const double> target);

double predict_linear(const LinearModel& model, std::span<const double> x);
std::vector<double> predict_linear(const LinearModel& model, const Matrix& features);

}  // namespace windreg
