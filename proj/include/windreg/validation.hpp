#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "windreg/dataset.hpp"
#include "windreg/knn.hpp"
#include "windreg/linear.hpp"
#include "windreg/metrics.hpp"
#include "windreg/tree.hpp"

namespace windreg {

enum class Algorithm { Linear, Knn, Tree };

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct KnnSearch {
  std::optional<std::size_t> fixed_k;  // skips the search when set
  std::vector<std::size_t> candidates = default_k_candidates();
  std::size_t inner_folds = kDefaultInnerFolds;
};

struct RegressorSpec {
  Algorithm algorithm = Algorithm::Linear;
  KnnSearch knn;
  TreeParams tree;
  std::uint64_t seed = 42;

  void validate() const;
};

RegressorSpec default_spec(Algorithm a, std::uint64_t seed);

using FittedModel = std::variant<LinearModel, KnnModel, Tree>;

Algorithm algorithm_of(const FittedModel& model);

/// Fits on exactly the rows given; for kNN the standardizer and any k search
/// see only these rows.
FittedModel fit_regressor(const RegressorSpec& spec, const Matrix& features, std::span<const double> target,
                          unsigned threads = 1);

double predict(const FittedModel& model, std::span<const double> x);
std::vector<double> predict(const FittedModel& model, const Matrix& features);

enum class SplitMode { Shuffled, Chronological };

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Test size is round(test_fraction * n). Chronological mode holds out the
/// last rows. Throws DegenerateSplit when either part would be empty.
TrainTestSplit split_train_test(std::size_t n, double test_fraction, std::uint64_t seed,
                                SplitMode mode = SplitMode::Shuffled);

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of_row;

  std::vector<std::size_t> rows_in(std::size_t fold) const;
  std::vector<std::size_t> rows_outside(std::size_t fold) const;
  std::vector<std::size_t> sizes() const;
};

/// Shuffles the rows and deals them round-robin into k folds.
FoldAssignment kfold(std::size_t n, std::size_t k, std::uint64_t seed);

struct CvFold {
  double score = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t test_size = 0;
  std::optional<std::size_t> chosen_k;
};

struct CvResult {
  Algorithm algorithm = Algorithm::Linear;
  Metric metric = Metric::R2Score;
  std::vector<CvFold> folds;
  double average = 0.0;
  std::vector<FittedModel> models;  // one per fold, fitted on the rows outside it
};

/// Arithmetic mean accumulated left to right.
double average_of(std::span<const double> scores);

/// Fold f is scored by a model fitted on every row outside f with seed
/// derive_seed(spec.seed, f). Model errors are rethrown prefixed with the fold.
CvResult cross_validate(const RegressorSpec& spec, const Dataset& ds, const FoldAssignment& folds,
                        Metric metric = Metric::R2Score, unsigned threads = 1);

struct EvalConfig {
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  SplitMode mode = SplitMode::Shuffled;
  std::size_t permutation_repeats = 5;
  unsigned threads = 1;
};

struct ModelEval {
  RegressorSpec spec;
  ScorePair scores;
  std::optional<std::size_t> chosen_k;
  std::vector<double> permutation_importance;
  std::vector<double> test_predictions;
  FittedModel model;
};

struct EvalResult {
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  TrainTestSplit split;
  std::vector<double> test_actual;
  std::vector<ModelEval> models;
  std::optional<FeatureImportance> tree_importance;  // set when a tree spec is present

  const ModelEval* find(Algorithm a) const;
};

EvalResult evaluate(std::span<const RegressorSpec> specs, const Dataset& ds, const EvalConfig& cfg);

/// Mean test-MAE increase per feature over `repeats` seeded shuffles of that
/// column; negative increases clamp to 0 and the vector is normalized to sum
/// 1 when any entry is positive.
std::vector<double> permutation_importance(const FittedModel& model, const Matrix& test_features,
                                           std::span<const double> test_target, std::size_t repeats,
                                           std::uint64_t seed, unsigned threads = 1);

std::vector<double> permutation_importance(const RegressorSpec& spec, const Dataset& ds,
                                           const TrainTestSplit& split, std::size_t repeats,
                                           std::uint64_t seed, unsigned threads = 1);

}  // namespace windreg
