#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "windreg/dataset.hpp"
#include "windreg/matrix.hpp"

namespace windreg {

struct Neighbor {
  std::size_t index;
  double distance;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ascending by distance; equal distances ordered by training index.
using NeighborList = std::vector<Neighbor>;

/// Inverse-distance weighted k-nearest-neighbor regressor over z-scored
/// features. Fitting only stores the standardized training set.
class KnnModel {
 public:
  KnnModel() = default;
  KnnModel(Standardizer standardizer, Matrix standardized_features, std::vector<double> targets,
           std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return targets_.size(); }
  std::size_t dimension() const noexcept { return features_.cols(); }
  const Standardizer& standardizer() const noexcept { return standardizer_; }
  const Matrix& standardized_features() const noexcept { return features_; }
  const std::vector<double>& targets() const noexcept { return targets_; }

  friend bool operator==(const KnnModel&, const KnnModel&) = default;

 private:
  Standardizer standardizer_;
  Matrix features_;
  std::vector<double> targets_;
  std::size_t k_ = 0;
};

/// Throws InvalidK unless 1 <= k <= n.
KnnModel fit_knn(const Matrix& features, std::span<const double> target, std::size_t k,
                 const Standardizer& standardizer);

/// Every training row, sorted by Euclidean distance to the query in
/// standardized space.
NeighborList neighbors(const KnnModel& model, std::span<const double> query);

/// Weighted average of the first k entries of an already sorted list. If any
/// of them sits at distance 0 the plain mean of those coincident targets is
/// returned instead.
double weighted_average(std::span<const Neighbor> nearest, std::span<const double> targets);

double predict_knn(const KnnModel& model, std::span<const double> query);
std::vector<double> predict_knn(const KnnModel& model, const Matrix& queries);

struct KSelection {
  std::size_t k = 0;
  std::vector<std::size_t> candidates;
  std::vector<double> mean_rmse;  // parallel to candidates; empty for a single candidate
};

inline std::vector<std::size_t> default_k_candidates() {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= 25; ++k) out.push_back(k);
  return out;
}
inline constexpr std::size_t kDefaultInnerFolds = 5;

/// Chooses k by minimal mean RMSE over `folds` cross-validation folds; the
/// standardizer is refit on each fold's training part. Ties go to the
/// smaller k.
KSelection select_k(const Matrix& features, std::span<const double> target,
                    std::span<const std::size_t> k_candidates, std::size_t folds, std::uint64_t seed,
                    unsigned threads = 1);

}  // namespace windreg
