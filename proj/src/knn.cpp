#include "windreg/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "windreg/metrics.hpp"
#include "windreg/parallel.hpp"
#include "windreg/validation.hpp"

namespace windreg {

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

NeighborList distances_to(const Matrix& train, std::span<const double> z) {
  NeighborList list(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const auto row = train.row(i);
    double ss = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double d = z[c] - row[c];
      ss += d * d;
    }
    list[i] = {i, std::sqrt(ss)};
  }
  return list;
}

std::vector<double> standardize_query(const KnnModel& model, std::span<const double> query) {
  if (query.size() != model.dimension())
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("model has {} features, query has {}", model.dimension(), query.size()));
  std::vector<double> z(query.size());
  model.standardizer().transform_row(query, z);
  return z;
}

// First `count` neighbors in the same order a full sort would give them;
// closer() is a strict total order so the prefix is unique.
NeighborList nearest(const KnnModel& model, std::span<const double> query, std::size_t count) {
  const auto z = standardize_query(model, query);
  auto list = distances_to(model.standardized_features(), z);
  count = std::min(count, list.size());
  std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(count), list.end(), closer);
  list.resize(count);
  return list;
}

}  // namespace

KnnModel::KnnModel(Standardizer standardizer, Matrix standardized_features, std::vector<double> targets,
                   std::size_t k)
    : standardizer_(std::move(standardizer)),
      features_(std::move(standardized_features)),
      targets_(std::move(targets)),
      k_(k) {
  if (features_.rows() != targets_.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} training rows but {} targets", features_.rows(), targets_.size()));
  if (standardizer_.dimension() != features_.cols())
    throw Error(ErrorCode::DimensionMismatch, "standardizer dimension differs from feature count");
  if (k_ < 1 || k_ > targets_.size())
    throw Error(ErrorCode::InvalidK, fmt::format("k = {} outside [1, {}]", k_, targets_.size()));
}

KnnModel fit_knn(const Matrix& features, std::span<const double> target, std::size_t k,
                 const Standardizer& standardizer) {
  if (features.rows() != target.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} rows but {} targets", features.rows(), target.size()));
  if (k < 1 || k > features.rows())
    throw Error(ErrorCode::InvalidK, fmt::format("k = {} outside [1, {}]", k, features.rows()));
  return KnnModel(standardizer, standardizer.transform(features),
                  std::vector<double>(target.begin(), target.end()), k);
}

NeighborList neighbors(const KnnModel& model, std::span<const double> query) {
  const auto z = standardize_query(model, query);
  auto list = distances_to(model.standardized_features(), z);
  std::sort(list.begin(), list.end(), closer);
  return list;
}

double weighted_average(std::span<const Neighbor> nearest, std::span<const double> targets) {
  if (nearest.empty()) throw Error(ErrorCode::EmptyInput, "no neighbors to average");
  if (nearest.front().distance == 0.0) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& nb : nearest) {
      if (nb.distance != 0.0) break;
      sum += targets[nb.index];
      ++count;
    }
    return sum / static_cast<double>(count);
  }
  double num = 0.0, den = 0.0;
  for (const auto& nb : nearest) {
    const double w = 1.0 / nb.distance;
    num += w * targets[nb.index];
    den += w;
  }
  return num / den;
}

double predict_knn(const KnnModel& model, std::span<const double> query) {
  const auto list = nearest(model, query, model.k());
  return weighted_average(list, model.targets());
}

std::vector<double> predict_knn(const KnnModel& model, const Matrix& queries) {
  std::vector<double> out(queries.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) out[i] = predict_knn(model, queries.row(i));
  return out;
}

KSelection select_k(const Matrix& features, std::span<const double> target,
                    std::span<const std::size_t> k_candidates, std::size_t folds, std::uint64_t seed,
                    unsigned threads) {
  if (k_candidates.empty()) throw Error(ErrorCode::InvalidCandidate, "no k candidates given");
  if (folds < 2) throw Error(ErrorCode::InvalidParams, fmt::format("need at least 2 folds, got {}", folds));
  const std::size_t n = features.rows();
  if (n != target.size())
    throw Error(ErrorCode::LengthMismatch, fmt::format("{} rows but {} targets", n, target.size()));
  if (n < folds)
    throw Error(ErrorCode::TooFewRows, fmt::format("{} rows cannot fill {} folds", n, folds));

  // Smallest training part is n minus the largest fold, ceil(n / folds).
  const std::size_t min_train = n - (n + folds - 1) / folds;
  for (auto k : k_candidates)
    if (k < 1 || k > min_train)
      throw Error(ErrorCode::InvalidCandidate,
                  fmt::format("k = {} outside [1, {}] (smallest training fold)", k, min_train));

  KSelection result;
  result.candidates.assign(k_candidates.begin(), k_candidates.end());
  if (k_candidates.size() == 1) {
    result.k = k_candidates.front();
    return result;
  }

  const std::size_t k_max = *std::max_element(k_candidates.begin(), k_candidates.end());
  const auto assignment = kfold(n, folds, seed);

  // rmse_per_fold[f][c] for candidate c.
  std::vector<std::vector<double>> rmse_per_fold(folds);
  parallel_for(folds, threads, [&](std::size_t f) {
    const auto train_rows = assignment.rows_outside(f);
    const auto test_rows = assignment.rows_in(f);
    const Matrix train_x = features.select_rows(train_rows);
    const auto train_y = select<double>(target, train_rows);
    const KnnModel model = fit_knn(train_x, train_y, k_max, fit_standardizer(train_x));

    std::vector<std::vector<double>> predictions(k_candidates.size(),
                                                 std::vector<double>(test_rows.size()));
    std::vector<double> actual(test_rows.size());
    for (std::size_t q = 0; q < test_rows.size(); ++q) {
      actual[q] = target[test_rows[q]];
      const auto list = nearest(model, features.row(test_rows[q]), k_max);
      for (std::size_t c = 0; c < k_candidates.size(); ++c)
        predictions[c][q] =
            weighted_average(std::span(list).first(k_candidates[c]), model.targets());
    }
    auto& scores = rmse_per_fold[f];
    for (std::size_t c = 0; c < k_candidates.size(); ++c) scores.push_back(rmse(actual, predictions[c]));
  });

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k_candidates.size(); ++c) {
    double sum = 0.0;
    for (std::size_t f = 0; f < folds; ++f) sum += rmse_per_fold[f][c];
    const double mean = sum / static_cast<double>(folds);
    result.mean_rmse.push_back(mean);
    if (mean < best || (mean == best && k_candidates[c] < result.k)) {
      best = mean;
      result.k = k_candidates[c];
    }
  }
  return result;
}

}  // namespace windreg
