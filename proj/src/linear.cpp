#include "windreg/linear.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace windreg {

LinearModel fit_linear(const Matrix& features, std::span<const double> target) {
  const std::size_t n = features.rows();
  const std::size_t p = features.cols();
  if (target.size() != n)
    throw Error(ErrorCode::LengthMismatch, fmt::format("{} rows but {} targets", n, target.size()));
  if (n < p + 1)
    throw Error(ErrorCode::TooFewRows, fmt::format("{} rows cannot determine {} coefficients", n, p + 1));

  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t k = 0; k < p; ++k) design(i, k + 1) = features(i, k);
    y(i) = target[i];
  }

  const double max_norm = design.colwise().norm().maxCoeff();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p + 1).triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j <= p; ++j) {
    if (std::abs(r(j, j)) <= kRankTolerance * max_norm) {
      if (j == 0) throw Error(ErrorCode::RankDeficient, "intercept column is degenerate");
      throw Error(ErrorCode::RankDeficient,
                  fmt::format("feature column {} is linearly dependent on the intercept and earlier columns",
                              j - 1));
    }
  }

  const Eigen::VectorXd beta = qr.solve(y);
  LinearModel model;
  model.intercept = beta(0);
  model.slopes.assign(beta.data() + 1, beta.data() + beta.size());
  for (double b : model.slopes)
    if (!std::isfinite(b)) throw Error(ErrorCode::RankDeficient, "non-finite coefficient");

  const Eigen::VectorXd residual = y - design * beta;
  if (n > p + 1)
    model.residual_std = std::sqrt(residual.squaredNorm() / static_cast<double>(n - p - 1));
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.slopes.size())
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("model has {} features, input has {}", model.slopes.size(), x.size()));
  double y = model.intercept;
  for (std::size_t k = 0; k < x.size(); ++k) y += model.slopes[k] * x[k];
  return y;
}

std::vector<double> predict_linear(const LinearModel& model, const Matrix& features) {
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = predict_linear(model, features.row(i));
  return out;
}

}  // namespace windreg
