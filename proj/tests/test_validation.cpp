#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "windreg/model_io.hpp"
#include "windreg/parallel.hpp"
#include "windreg/validation.hpp"

using namespace windreg;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Usage;
}

// y = 5 + 2 t - 3 h exactly; columns stay inside the dataset domain.
Dataset linear_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Matrix x(n, kFeatureCount);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, kAirTemperature) = 20 * u(rng) - 5;
    x(i, kBarometricPressure) = 980 + 50 * u(rng);
    x(i, kWindDirection) = 359 * u(rng);
    x(i, kWindSpeed) = 20 * u(rng);
    y[i] = 5 + 2 * x(i, kAirTemperature) - 3 * x(i, kWindSpeed);
  }
  return make_dataset(std::move(x), std::move(y));
}

}  // namespace

TEST_CASE("split_train_test") {
  SUBCASE("10 rows at 0.2") {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
      const auto s = split_train_test(10, 0.2, seed);
      CHECK(s.train.size() == 8);
      CHECK(s.test.size() == 2);
      std::set<std::size_t> all(s.train.begin(), s.train.end());
      all.insert(s.test.begin(), s.test.end());
      CHECK(all.size() == 10);
      CHECK(*all.rbegin() == 9);
    }
  }
  SUBCASE("4464 rows round to 893 test rows") {
    const auto s = split_train_test(4464, 0.2, 42);
    CHECK(s.test.size() == 893);
    CHECK(s.train.size() == 3571);
  }
  SUBCASE("deterministic per seed, different across seeds") {
    CHECK(split_train_test(100, 0.3, 5).test == split_train_test(100, 0.3, 5).test);
    CHECK(split_train_test(100, 0.3, 5).test != split_train_test(100, 0.3, 6).test);
  }
  SUBCASE("chronological mode holds out the tail") {
    const auto s = split_train_test(10, 0.3, 5, SplitMode::Chronological);
    CHECK(s.test == std::vector<std::size_t>{7, 8, 9});
  }
  SUBCASE("degenerate splits") {
    CHECK(code_of([] { split_train_test(10, 0.0, 1); }) == ErrorCode::DegenerateSplit);
    CHECK(code_of([] { split_train_test(10, 1.0, 1); }) == ErrorCode::DegenerateSplit);
    CHECK(code_of([] { split_train_test(1, 0.5, 1); }) == ErrorCode::DegenerateSplit);
    CHECK(code_of([] { split_train_test(3, 0.1, 1); }) == ErrorCode::DegenerateSplit);
  }
}

TEST_CASE("kfold") {
  SUBCASE("n = k gives singletons") {
    const auto f = kfold(10, 10, 3);
    CHECK(f.sizes() == std::vector<std::size_t>(10, 1));
  }
  SUBCASE("23 rows in 10 folds") {
    auto sizes = kfold(23, 10, 3).sizes();
    CHECK(std::count(sizes.begin(), sizes.end(), 3u) == 3);
    CHECK(std::count(sizes.begin(), sizes.end(), 2u) == 7);
  }
  SUBCASE("partition property across sizes") {
    for (std::size_t n = 10; n <= 100; ++n)
      for (std::size_t k : {2u, 5u, 10u}) {
        const auto f = kfold(n, k, n * 31 + k);
        const auto sizes = f.sizes();
        const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*hi - *lo <= 1);
        std::size_t total = 0;
        for (std::size_t fold = 0; fold < k; ++fold) {
          const auto in = f.rows_in(fold), out = f.rows_outside(fold);
          CHECK(in.size() + out.size() == n);
          total += in.size();
        }
        CHECK(total == n);
      }
  }
  SUBCASE("invalid fold counts") {
    CHECK(code_of([] { kfold(10, 1, 0); }) == ErrorCode::InvalidK);
    CHECK(code_of([] { kfold(5, 6, 0); }) == ErrorCode::InvalidK);
  }
}

TEST_CASE("average of fold scores") {
  const std::vector<double> s = {0.25, 0.5, 0.75};
  CHECK(average_of(s) == 0.5);
  CHECK(code_of([] { average_of(std::vector<double>{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("reference per-fold scores average to the reference row") {
  auto rounded = [](const std::vector<double>& v) { return std::round(average_of(v) * 1e4) / 1e4; };
  CHECK(rounded({0.8696, 0.9092, 0.8861, 0.9127, 0.8486, 0.8461, 0.9113, 0.8876, 0.9077, 0.8668}) == 0.8846);
  CHECK(rounded({0.8778, 0.9358, 0.9262, 0.9023, 0.9043, 0.9539, 0.8968, 0.9104, 0.9140, 0.9494}) == 0.9171);
  CHECK(rounded({0.8993, 0.9191, 0.8806, 0.8905, 0.9036, 0.9578, 0.8764, 0.9299, 0.8862, 0.9326}) == 0.9076);
}

TEST_CASE("cross_validate") {
  SUBCASE("noiseless linear data scores 1 on every fold") {
    const auto ds = linear_dataset(120, 1);
    const auto cv = cross_validate(default_spec(Algorithm::Linear, 1), ds, kfold(ds.size(), 10, 1));
    REQUIRE(cv.folds.size() == 10);
    for (const auto& f : cv.folds) CHECK(f.score == doctest::Approx(1.0).epsilon(1e-10));
    std::vector<double> scores;
    for (const auto& f : cv.folds) scores.push_back(f.score);
    CHECK(cv.average == average_of(scores));
  }
  SUBCASE("errors carry the fold index") {
    const auto ds = linear_dataset(20, 2);
    RegressorSpec spec = default_spec(Algorithm::Knn, 1);
    spec.knn.fixed_k = 19;  // training parts have 18 rows
    try {
      cross_validate(spec, ds, kfold(20, 10, 1));
      FAIL("expected InvalidK");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidK);
      CHECK(std::string(e.what()).find("fold 0") != std::string::npos);
    }
  }
  SUBCASE("kNN records the chosen k per fold") {
    const auto ds = generate_synthetic({.rows = 300, .seed = 4});
    RegressorSpec spec = default_spec(Algorithm::Knn, 9);
    spec.knn.candidates = {1, 3, 5, 9};
    const auto cv = cross_validate(spec, ds, kfold(ds.size(), 5, 9));
    for (const auto& f : cv.folds) {
      REQUIRE(f.chosen_k);
      CHECK(std::find(spec.knn.candidates.begin(), spec.knn.candidates.end(), *f.chosen_k) !=
            spec.knn.candidates.end());
    }
  }
  SUBCASE("parallel folds give identical results") {
    const auto ds = generate_synthetic({.rows = 400, .seed = 5});
    const auto folds = kfold(ds.size(), 10, 5);
    for (auto a : {Algorithm::Linear, Algorithm::Knn, Algorithm::Tree}) {
      const auto one = cross_validate(default_spec(a, 5), ds, folds, Metric::R2Score, 1);
      const auto many = cross_validate(default_spec(a, 5), ds, folds, Metric::R2Score, 4);
      CHECK(one.average == many.average);
      for (std::size_t f = 0; f < 10; ++f) {
        CHECK(one.folds[f].score == many.folds[f].score);
        CHECK(one.folds[f].mae == many.folds[f].mae);
      }
    }
  }
}

TEST_CASE("no leakage: garbage test-fold targets leave fitted models bit-identical") {
  const auto ds = generate_synthetic({.rows = 250, .seed = 6});
  const auto folds = kfold(ds.size(), 5, 6);
  for (auto a : {Algorithm::Linear, Algorithm::Knn, Algorithm::Tree}) {
    const auto spec = default_spec(a, 6);
    const auto clean = cross_validate(spec, ds, folds);
    for (std::size_t f = 0; f < folds.k; ++f) {
      // Corrupt every target in fold f and refit that fold only.
      auto target = ds.target();
      for (auto r : folds.rows_in(f)) target[r] = 1e6 + static_cast<double>(r);
      const auto dirty = make_dataset(ds.features(), target, ds.timestamps());
      const auto model = fit_regressor(
          [&] {
            auto s = spec;
            s.seed = derive_seed(spec.seed, f);
            return s;
          }(),
          dirty.features().select_rows(folds.rows_outside(f)),
          select<double>(dirty.target(), folds.rows_outside(f)));
      const ModelFile lhs{kModelFormatVersion, clean.models[f], {}};
      const ModelFile rhs{kModelFormatVersion, model, {}};
      CHECK(serialize_model(lhs) == serialize_model(rhs));
    }
  }
}

TEST_CASE("evaluate") {
  SUBCASE("noiseless linear data") {
    const auto ds = linear_dataset(200, 3);
    const std::vector<RegressorSpec> specs = {default_spec(Algorithm::Linear, 1)};
    const auto eval = evaluate(specs, ds, {});
    REQUIRE(eval.models.size() == 1);
    CHECK(eval.models[0].scores.mae < 1e-6);
    CHECK(eval.models[0].scores.r2_score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eval.test_size == 40);
    CHECK(eval.train_size + eval.test_size == ds.size());
  }
  SUBCASE("single spec on ten rows") {
    const auto ds = linear_dataset(10, 4);
    const std::vector<RegressorSpec> specs = {default_spec(Algorithm::Tree, 1)};
    const auto eval = evaluate(specs, ds, {});
    CHECK(eval.models.size() == 1);
    CHECK(eval.tree_importance);
  }
  SUBCASE("synthetic ordering: tree and kNN beat linear on MAE") {
    const auto ds = generate_synthetic({});
    const std::vector<RegressorSpec> specs = {default_spec(Algorithm::Linear, 1), default_spec(Algorithm::Knn, 1),
                                              default_spec(Algorithm::Tree, 1)};
    EvalConfig cfg;
    cfg.seed = 1;
    const auto eval = evaluate(specs, ds, cfg);
    const double lin = eval.find(Algorithm::Linear)->scores.mae;
    CHECK(eval.find(Algorithm::Tree)->scores.mae < lin);
    CHECK(eval.find(Algorithm::Knn)->scores.mae < lin);
    REQUIRE(eval.find(Algorithm::Knn)->chosen_k);
  }
}

TEST_CASE("permutation importance") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t n = 400;
  Matrix x(n, kFeatureCount);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 10 * u(rng);
    x(i, 1) = 1000 + 10 * u(rng);
    x(i, 2) = 300 * u(rng);
    x(i, 3) = 10 * u(rng);
    y[i] = 5 * x(i, 0);
  }
  const auto ds = make_dataset(x, y);
  const auto split = split_train_test(n, 0.25, 1);
  SUBCASE("target driven by feature 0 alone") {
    for (auto a : {Algorithm::Linear, Algorithm::Tree}) {
      const auto imp = permutation_importance(default_spec(a, 1), ds, split, 5, 2);
      CHECK(imp[0] > 0.9);
      CHECK(std::abs(imp[0] + imp[1] + imp[2] + imp[3] - 1.0) <= 1e-12);
    }
  }
  SUBCASE("constant features get zero importance") {
    Matrix xc = x;
    for (std::size_t i = 0; i < n; ++i) {
      xc(i, 1) = 1000;
      xc(i, 2) = 100;
      xc(i, 3) = 4;
    }
    const auto dsc = make_dataset(xc, y);
    const auto imp = permutation_importance(default_spec(Algorithm::Knn, 1), dsc, split, 3, 2);
    CHECK(imp[1] == 0.0);
    CHECK(imp[2] == 0.0);
    CHECK(imp[3] == 0.0);
    CHECK(imp[0] == 1.0);
  }
  SUBCASE("zero repeats is rejected") {
    CHECK_THROWS_AS(permutation_importance(default_spec(Algorithm::Linear, 1), ds, split, 0, 2), Error);
  }
}

TEST_CASE("algorithm names round-trip") {
  for (auto a : {Algorithm::Linear, Algorithm::Knn, Algorithm::Tree}) CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_FALSE(parse_algorithm("forest"));
}
