#include "windreg/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "windreg/parallel.hpp"

namespace windreg {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Linear: return "linear";
    case Algorithm::Knn: return "knn";
    case Algorithm::Tree: return "tree";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  if (name == "linear") return Algorithm::Linear;
  if (name == "knn") return Algorithm::Knn;
  if (name == "tree") return Algorithm::Tree;
  return std::nullopt;
}

void RegressorSpec::validate() const {
  switch (algorithm) {
    case Algorithm::Linear:
      break;
    case Algorithm::Knn:
      if (knn.fixed_k && *knn.fixed_k < 1) throw Error(ErrorCode::InvalidK, "k must be at least 1");
      if (!knn.fixed_k) {
        if (knn.candidates.empty()) throw Error(ErrorCode::InvalidCandidate, "no k candidates given");
        if (knn.inner_folds < 2) throw Error(ErrorCode::InvalidParams, "k search needs at least 2 folds");
      }
      break;
    case Algorithm::Tree:
      tree.validate();
      break;
  }
}

RegressorSpec default_spec(Algorithm a, std::uint64_t seed) {
  RegressorSpec spec;
  spec.algorithm = a;
  spec.seed = seed;
  return spec;
}

Algorithm algorithm_of(const FittedModel& model) {
  return static_cast<Algorithm>(model.index());
}

FittedModel fit_regressor(const RegressorSpec& spec, const Matrix& features, std::span<const double> target,
                          unsigned threads) {
  spec.validate();
  switch (spec.algorithm) {
    case Algorithm::Linear:
      return fit_linear(features, target);
    case Algorithm::Knn: {
      std::size_t k = 0;
      if (spec.knn.fixed_k) {
        k = *spec.knn.fixed_k;
      } else {
        k = select_k(features, target, spec.knn.candidates, spec.knn.inner_folds, spec.seed, threads).k;
      }
      return fit_knn(features, target, k, fit_standardizer(features));
    }
    case Algorithm::Tree:
      return fit_tree(features, target, spec.tree);
  }
  throw Error(ErrorCode::InvalidParams, "unknown algorithm");
}

double predict(const FittedModel& model, std::span<const double> x) {
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearModel>) return predict_linear(m, x);
        else if constexpr (std::is_same_v<M, KnnModel>) return predict_knn(m, x);
        else return predict_tree(m, x);
      },
      model);
}

std::vector<double> predict(const FittedModel& model, const Matrix& features) {
  std::vector<double> out(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) out[i] = predict(model, features.row(i));
  return out;
}

TrainTestSplit split_train_test(std::size_t n, double test_fraction, std::uint64_t seed, SplitMode mode) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorCode::DegenerateSplit, fmt::format("test fraction {} outside (0, 1)", test_fraction));
  if (n < 2) throw Error(ErrorCode::DegenerateSplit, fmt::format("cannot split {} rows", n));
  const auto test_size = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (test_size == 0 || test_size >= n)
    throw Error(ErrorCode::DegenerateSplit,
                fmt::format("fraction {} of {} rows leaves an empty part", test_fraction, n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == SplitMode::Shuffled) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  TrainTestSplit split;
  split.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(test_size));
  split.test.assign(order.end() - static_cast<std::ptrdiff_t>(test_size), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<std::size_t> FoldAssignment::rows_in(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < fold_of_row.size(); ++r)
    if (fold_of_row[r] == fold) out.push_back(r);
  return out;
}

std::vector<std::size_t> FoldAssignment::rows_outside(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < fold_of_row.size(); ++r)
    if (fold_of_row[r] != fold) out.push_back(r);
  return out;
}

std::vector<std::size_t> FoldAssignment::sizes() const {
  std::vector<std::size_t> out(k, 0);
  for (auto f : fold_of_row) ++out[f];
  return out;
}

FoldAssignment kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) throw Error(ErrorCode::InvalidK, fmt::format("fold count {} outside [2, {}]", k, n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldAssignment folds;
  folds.k = k;
  folds.fold_of_row.resize(n);
  for (std::size_t i = 0; i < n; ++i) folds.fold_of_row[order[i]] = i % k;
  return folds;
}

double average_of(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyInput, "no scores to average");
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

CvResult cross_validate(const RegressorSpec& spec, const Dataset& ds, const FoldAssignment& folds,
                        Metric metric, unsigned threads) {
  spec.validate();
  if (folds.fold_of_row.size() != ds.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("fold assignment covers {} rows, dataset has {}", folds.fold_of_row.size(), ds.size()));

  CvResult result;
  result.algorithm = spec.algorithm;
  result.metric = metric;
  result.folds.resize(folds.k);
  result.models.resize(folds.k);

  const auto& x = ds.features();
  const auto& y = ds.target();
  parallel_for(folds.k, threads, [&](std::size_t f) {
    try {
      const auto train_rows = folds.rows_outside(f);
      const auto test_rows = folds.rows_in(f);
      RegressorSpec fold_spec = spec;
      fold_spec.seed = derive_seed(spec.seed, f);
      auto model = fit_regressor(fold_spec, x.select_rows(train_rows), select<double>(y, train_rows));
      const auto predicted = predict(model, x.select_rows(test_rows));
      const auto actual = select<double>(y, test_rows);
      CvFold& out = result.folds[f];
      out.score = evaluate_metric(metric, actual, predicted);
      out.mae = mae(actual, predicted);
      out.rmse = rmse(actual, predicted);
      out.test_size = test_rows.size();
      if (const auto* knn = std::get_if<KnnModel>(&model)) out.chosen_k = knn->k();
      result.models[f] = std::move(model);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("fold {}: {}", f, e.what()));
    }
  });

  std::vector<double> scores;
  for (const auto& f : result.folds) scores.push_back(f.score);
  result.average = average_of(scores);
  return result;
}

const ModelEval* EvalResult::find(Algorithm a) const {
  for (const auto& m : models)
    if (m.spec.algorithm == a) return &m;
  return nullptr;
}

std::vector<double> permutation_importance(const FittedModel& model, const Matrix& test_features,
                                           std::span<const double> test_target, std::size_t repeats,
                                           std::uint64_t seed, unsigned threads) {
  if (repeats < 1) throw Error(ErrorCode::InvalidParams, "permutation importance needs at least one repeat");
  const auto baseline = mae(test_target, predict(model, test_features));
  const std::size_t p = test_features.cols();
  std::vector<double> increase(p, 0.0);
  parallel_for(p, threads, [&](std::size_t f) {
    Matrix shuffled = test_features;
    auto column = test_features.column(f);
    double sum = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      std::mt19937_64 rng(derive_seed(derive_seed(seed, f), r));
      auto permuted = column;
      std::shuffle(permuted.begin(), permuted.end(), rng);
      shuffled.set_column(f, permuted);
      sum += mae(test_target, predict(model, shuffled)) - baseline;
    }
    increase[f] = std::max(0.0, sum / static_cast<double>(repeats));
  });
  double total = 0.0;
  for (double v : increase) total += v;
  if (total > 0.0)
    for (double& v : increase) v /= total;
  return increase;
}

std::vector<double> permutation_importance(const RegressorSpec& spec, const Dataset& ds,
                                           const TrainTestSplit& split, std::size_t repeats,
                                           std::uint64_t seed, unsigned threads) {
  const auto& x = ds.features();
  const auto& y = ds.target();
  const auto model = fit_regressor(spec, x.select_rows(split.train), select<double>(y, split.train), threads);
  return permutation_importance(model, x.select_rows(split.test), select<double>(y, split.test), repeats, seed,
                                threads);
}

EvalResult evaluate(std::span<const RegressorSpec> specs, const Dataset& ds, const EvalConfig& cfg) {
  EvalResult result;
  result.seed = cfg.seed;
  result.split = split_train_test(ds.size(), cfg.test_fraction, cfg.seed, cfg.mode);
  result.train_size = result.split.train.size();
  result.test_size = result.split.test.size();

  const auto& x = ds.features();
  const auto& y = ds.target();
  const Matrix train_x = x.select_rows(result.split.train);
  const auto train_y = select<double>(y, result.split.train);
  const Matrix test_x = x.select_rows(result.split.test);
  result.test_actual = select<double>(y, result.split.test);

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    auto model = fit_regressor(spec, train_x, train_y, cfg.threads);
    ModelEval eval{spec, {}, std::nullopt, {}, predict(model, test_x), std::move(model)};
    eval.scores = score(result.test_actual, eval.test_predictions);
    if (const auto* knn = std::get_if<KnnModel>(&eval.model)) eval.chosen_k = knn->k();
    eval.permutation_importance = permutation_importance(eval.model, test_x, result.test_actual,
                                                         cfg.permutation_repeats, derive_seed(cfg.seed, 100 + i),
                                                         cfg.threads);
    if (const auto* tree = std::get_if<Tree>(&eval.model); tree && !result.tree_importance)
      result.tree_importance = tree_importance(*tree);
    result.models.push_back(std::move(eval));
  }
  return result;
}

}  // namespace windreg
