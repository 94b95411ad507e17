// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "windreg/cli.hpp"
#include "windreg/report.hpp"

using namespace windreg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;  // report the first failure
    pass = false;
  }
};

struct Criterion {
  int id;
  std::string title;
  double budget_ms;
  std::function<Outcome()> run;
};

std::string round4(double v) { return fmt::format("{:.4f}", v); }

// ---- 1 --------------------------------------------------------------------

Outcome fold_averaging() {
  struct Column {
    const char* name;
    std::vector<double> folds;
    const char* average;
  };
  const std::vector<Column> table = {
      {"linear", {0.8696, 0.9092, 0.8861, 0.9127, 0.8486, 0.8461, 0.9113, 0.8876, 0.9077, 0.8668}, "0.8846"},
      {"knn", {0.8778, 0.9358, 0.9262, 0.9023, 0.9043, 0.9539, 0.8968, 0.9104, 0.9140, 0.9494}, "0.9171"},
      {"tree", {0.8993, 0.9191, 0.8806, 0.8905, 0.9036, 0.9578, 0.8764, 0.9299, 0.8862, 0.9326}, "0.9076"},
  };
  Outcome o;
  std::string got;
  for (const auto& c : table) {
    const auto avg = round4(average_of(c.folds));
    got += fmt::format("{}={} ", c.name, avg);
    o.require(avg == c.average, fmt::format("{} average {} != {}", c.name, avg, c.average));
  }
  if (o.pass) o.detail = got;
  return o;
}

// ---- 2 --------------------------------------------------------------------

Outcome importance_consistency() {
  Outcome o;
  std::mt19937_64 rng(2);
  double worst = 0.0;
  int fits = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 20 + 10 * static_cast<std::size_t>(trial % 8);
    const auto rows = oracle::random_rows(rng, n, kFeatureCount);
    std::vector<double> y(n);
    std::normal_distribution<double> noise(0, 1);
    for (std::size_t i = 0; i < n; ++i) y[i] = rows[i][3] * rows[i][3] + 0.5 * rows[i][0] + noise(rng);
    TreeParams params;
    if (trial % 3 == 1) params.max_depth = 1 + trial % 5;
    if (trial % 3 == 2) {
      params.min_samples_leaf = 3;
      params.min_samples_split = 6;
    }
    const auto imp = tree_importance(fit_tree(Matrix::from_rows(rows), y, params));
    double sum = 0.0;
    for (double v : imp.values) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
    ++fits;
  }
  const auto synth = generate_synthetic({.rows = 1000, .seed = 1});
  const auto imp = tree_importance(fit_tree(synth.features(), synth.target()));
  double sum = 0.0;
  for (double v : imp.values) sum += v;
  worst = std::max(worst, std::abs(sum - 1.0));
  o.require(worst <= 1e-9, fmt::format("importance sum off by {:.3g}", worst));

  const std::vector<double> reference = {0.0207, 0.0806, 0.0501, 0.8486};
  o.require(round4(reference[0] + reference[1] + reference[2] + reference[3]) == "1.0000",
            "reference importances do not sum to 1.0000");
  o.require(importance_normalized(reference, 1e-4), "table normalization check rejects the reference values");
  o.require(!importance_normalized(std::vector<double>{0.0207, 0.0806, 0.0501, 0.7486}, 1e-4),
            "table normalization check accepts a broken column");
  if (o.pass) o.detail = fmt::format("{} trees, max |sum-1| = {:.2g}; reference column sums to 1.0000", fits + 1, worst);
  return o;
}

// ---- 3 --------------------------------------------------------------------

Outcome qualitative_reproduction() {
  Outcome o;
  const auto ds = generate_synthetic({});
  o.require(ds.size() == 4464, "default synthetic size is not 4464");
  std::vector<RegressorSpec> specs;
  for (auto a : {Algorithm::Linear, Algorithm::Knn, Algorithm::Tree}) specs.push_back(default_spec(a, 1));
  EvalConfig cfg;
  cfg.seed = 1;
  const auto eval = evaluate(specs, ds, cfg);
  const double lin = eval.find(Algorithm::Linear)->scores.mae;
  const double knn = eval.find(Algorithm::Knn)->scores.mae;
  const double tree = eval.find(Algorithm::Tree)->scores.mae;
  o.require(tree < knn, fmt::format("MAE tree {:.2f} !< kNN {:.2f}", tree, knn));
  o.require(knn < lin, fmt::format("MAE kNN {:.2f} !< linear {:.2f}", knn, lin));
  const auto& imp = eval.tree_importance->values;
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    if (f != kWindSpeed)
      o.require(imp[kWindSpeed] > imp[f], fmt::format("wind_speed importance {:.4f} not above {} {:.4f}",
                                                      imp[kWindSpeed], kColumnNames[f], imp[f]));
  if (o.pass)
    o.detail = fmt::format("MAE tree {:.2f} < kNN {:.2f} < linear {:.2f}; wind_speed importance {:.4f}", tree, knn,
                           lin, imp[kWindSpeed]);
  return o;
}

// ---- 4 --------------------------------------------------------------------

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937_64 rng(4);
  double worst_linear = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t p = 1 + t % 4;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(p + 2, 50)(rng);
    const auto x = oracle::random_rows(rng, n, p);
    std::normal_distribution<double> noise(0, 2);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = 3.0 + noise(rng);
      for (std::size_t k = 0; k < p; ++k) y[i] += (1.0 + static_cast<double>(k)) * x[i][k];
    }
    const auto m = fit_linear(Matrix::from_rows(x), y);
    const auto beta = oracle::normal_equations(x, y);
    worst_linear = std::max(worst_linear, rel_err(m.intercept, beta[0]));
    for (std::size_t k = 0; k < p; ++k) worst_linear = std::max(worst_linear, rel_err(m.slopes[k], beta[k + 1]));
  }
  o.require(worst_linear <= 1e-8, fmt::format("(a) linear relative error {:.3g}", worst_linear));

  int knn_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t p = 1 + t % 4;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 200)(rng);
    auto rows = oracle::random_rows(rng, n, p);
    if (t % 4 == 0)  // coarse grid values produce distance ties and exact hits
      for (auto& r : rows)
        for (auto& v : r) v = std::round(v / 4.0);
    std::vector<double> y(n);
    std::uniform_real_distribution<double> u(0, 2000);
    for (auto& v : y) v = u(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(n, 25))(rng);
    const Matrix x = Matrix::from_rows(rows);
    const auto model = fit_knn(x, y, k, fit_standardizer(x));
    for (int q = 0; q < 5; ++q) {
      auto query = oracle::random_rows(rng, 1, p).front();
      if (q == 0) query = rows[n / 2];
      const double want = oracle::knn_predict(rows, y, model.standardizer().centers(), model.standardizer().scales(),
                                              k, query);
      knn_mismatch += predict_knn(model, query) != want;
    }
  }
  o.require(knn_mismatch == 0, fmt::format("(b) {} kNN predictions differ from brute force", knn_mismatch));

  int split_mismatch = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 64)(rng);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    auto rows = oracle::random_rows(rng, n, p);
    if (t % 3 == 0)
      for (auto& r : rows)
        for (auto& v : r) v = std::round(v);
    std::vector<double> y(n);
    std::normal_distribution<double> noise(0, 3);
    for (std::size_t i = 0; i < n; ++i) y[i] = 40.0 * std::tanh(rows[i][p - 1]) + noise(rng);
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const auto got = best_split(Matrix::from_rows(rows), y, all, {});
    const auto want = oracle::exhaustive_split(rows, y);
    const bool same = got.has_value() == want.has_value() &&
                      (!got || (got->feature == want->feature && got->threshold == want->threshold &&
                                std::abs(got->objective - want->objective) <= 1e-9 * std::max(1.0, want->objective)));
    split_mismatch += !same;
  }
  o.require(split_mismatch == 0, fmt::format("(c) {} splits differ from exhaustive search", split_mismatch));
  if (o.pass)
    o.detail = fmt::format("linear max rel err {:.2g}; 500 kNN queries exact; 100 splits identical", worst_linear);
  return o;
}

// ---- 5 --------------------------------------------------------------------

using V = std::vector<double>;

Outcome metric_identities() {
  Outcome o;
  o.require(mae(V{1, 2, 3}, V{1, 2, 3}) == 0.0, "mae perfect");
  o.require(mae(V{0, 0}, V{1, -1}) == 1.0, "mae unit errors");
  o.require(mae(V{2, 4, 6}, V{1, 5, 9}) == 5.0 / 3.0, "mae 5/3");
  o.require(r2_ratio(V{1, 2, 3}, V{1, 2, 3}) == 1.0, "r2_ratio perfect");
  o.require(r2_ratio(V{3, 9, 0}, V{4, 4, 4}) == 0.0, "r2_ratio mean predictor");
  o.require(r2_ratio(V{0, 1, 2}, V{0, 2, 2}) == 1.5, "r2_ratio 3/2");
  o.require(r2_score(V{5, 1, 8}, V{5, 1, 8}) == 1.0, "r2_score perfect");
  o.require(r2_score(V{3, 9, 0}, V{4, 4, 4}) == 0.0, "r2_score mean predictor");
  o.require(r2_score(V{0, 1, 2}, V{0, 2, 2}) == 0.5, "r2_score 0.5");
  o.require(rmse(V{4, 7}, V{4, 7}) == 0.0, "rmse identical");
  o.require(rmse(V{0, 0}, V{3, 4}) == std::sqrt(12.5), "rmse sqrt(25/2)");
  o.require(fmt::format("{:.8f}", rmse(V{0, 0}, V{3, 4})) == "3.53553391", "rmse 3.53553391");

  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t p = 1 + t % 4;
    const std::size_t n = std::uniform_int_distribution<std::size_t>(p + 3, 200)(rng);
    const auto rows = oracle::random_rows(rng, n, p);
    std::normal_distribution<double> noise(0, 5);
    V y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 10.0 + 2.0 * rows[i][0] + noise(rng);
    const Matrix x = Matrix::from_rows(rows);
    const auto pred = predict_linear(fit_linear(x, y), x);
    worst = std::max(worst, std::abs(r2_ratio(y, pred) - r2_score(y, pred)));
    o.require(rmse(y, pred) >= mae(y, pred), "rmse < mae");
  }
  o.require(worst <= 1e-8, fmt::format("r2_ratio vs r2_score differ by {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("12 examples exact; OLS max |r2_ratio - r2_score| = {:.2g}", worst);
  return o;
}

// ---- 6 --------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "windreg");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) fmt::print(stderr, "windreg exited {}: {}", code, err.str());
  return code;
}

Outcome protocol_properties(const fs::path& scratch) {
  Outcome o;
  fs::create_directories(scratch);
  for (std::size_t n = 10; n <= 100; ++n)
    for (std::size_t k : {2u, 5u, 10u}) {
      const auto sizes = kfold(n, k, n * 100 + k).sizes();
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      std::size_t total = 0;
      for (auto s : sizes) total += s;
      o.require(*hi - *lo <= 1 && total == n, fmt::format("kfold n={} k={} unbalanced", n, k));
    }
  const auto split = split_train_test(4464, 0.2, 42);
  o.require(split.test.size() == 893 && split.train.size() == 3571,
            fmt::format("split gives {}/{}", split.test.size(), split.train.size()));

  const auto data = (scratch / "data.csv").string();
  o.require(cli({"synth", "--seed", "1", "--out", data}) == 0, "synth failed");
  const std::vector<std::pair<std::string, std::string>> runs = {{"run_a", "1"}, {"run_b", "1"}, {"run_c", "4"}};
  for (const auto& [dir, threads] : runs)
    o.require(cli({"compare", "--data", data, "--seed", "1", "--threads", threads, "--out",
                   (scratch / dir).string()}) == 0,
              "compare failed");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(scratch / "run_a")) {
    const auto name = entry.path().filename();
    const auto a = slurp(entry.path());
    o.require(a == slurp(scratch / "run_b" / name), fmt::format("{} differs between identical runs", name.string()));
    o.require(a == slurp(scratch / "run_c" / name), fmt::format("{} differs between 1 and 4 threads", name.string()));
    ++files;
  }
  o.require(files == 9, fmt::format("compare wrote {} files, expected 9", files));
  if (o.pass)
    o.detail = fmt::format("273 fold layouts balanced; split 893/3571; {} report files identical x3", files);
  return o;
}

// ---- 7 --------------------------------------------------------------------

Outcome report_contracts(const fs::path& scratch) {
  Outcome o;
  const auto ds = generate_synthetic({.rows = 1000, .seed = 7});
  ReportInputs in;
  in.dataset = &ds;
  in.summary = summarize(ds);
  const auto folds = kfold(ds.size(), 10, 7);
  std::vector<RegressorSpec> specs;
  for (auto a : {Algorithm::Linear, Algorithm::Knn, Algorithm::Tree}) {
    specs.push_back(default_spec(a, 7));
    in.cv.push_back(cross_validate(specs.back(), ds, folds));
  }
  in.eval = evaluate(specs, ds, {});
  const auto written = write_report(scratch / "report", in);

  std::size_t svgs = 0;
  for (const auto& path : written) {
    if (path.extension() != ".svg") continue;
    ++svgs;
    try {
      std::istringstream text(slurp(path));
      boost::property_tree::ptree tree;
      boost::property_tree::read_xml(text, tree);
    } catch (const std::exception& e) {
      o.require(false, fmt::format("{} is not XML: {}", path.filename().string(), e.what()));
    }
  }
  o.require(svgs == 5, fmt::format("{} SVG files written, expected 5", svgs));

  std::istringstream cv(slurp(scratch / "report" / "cv.csv"));
  std::vector<std::string> rows;
  for (std::string line; std::getline(cv, line);) rows.push_back(line);
  // header + 10 folds + Average
  o.require(rows.size() == 12 && rows.back().rfind("Average,", 0) == 0,
            fmt::format("cv.csv has {} data rows", rows.size() - 1));

  double worst = 0.0;
  for (const auto& m : in.eval->models) {
    const auto label = r2_annotation(r2_score(in.eval->test_actual, m.test_predictions));
    const auto svg = fit_plot(in.eval->test_actual, m.test_predictions, std::string(to_string(m.spec.algorithm)));
    const auto at = svg.find("class=\"annotation\"");
    const auto open = svg.find('>', at), close = svg.find("</text>", at);
    const auto shown = svg.substr(open + 1, close - open - 1);
    o.require(shown == label, fmt::format("annotation '{}' != '{}'", shown, label));
    const double value = std::stod(shown.substr(std::string("R² = ").size()));
    worst = std::max(worst, std::abs(value - m.scores.r2_score));
  }
  o.require(worst <= 5e-4, fmt::format("annotation off by {:.3g}", worst));
  if (o.pass) o.detail = fmt::format("{} SVGs parse; cv.csv 10 folds + Average; annotation max err {:.2g}", svgs, worst);
  return o;
}

}  // namespace

int main() {
  const auto scratch = fs::temp_directory_path() / "windreg_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::vector<Criterion> criteria = {
      {1, "Fold score averaging", 1, fold_averaging},
      {2, "Importance normalization", 1000, importance_consistency},
      {3, "Qualitative MAE ordering and wind speed importance", 30000, qualitative_reproduction},
      {4, "Oracle equivalence (linear, kNN, split)", 10000, oracle_equivalence},
      {5, "Metric identities", 1000, metric_identities},
      {6, "Protocol properties and determinism", 60000, [&] { return protocol_properties(scratch / "c6"); }},
      {7, "Figure and report contracts", 5000, [&] { return report_contracts(scratch / "c7"); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && ms > c.budget_ms) {
      o.pass = false;
      o.detail += fmt::format(" [over budget {:.0f} ms]", c.budget_ms);
    }
    failures += !o.pass;
    fmt::print("{} criterion {}: {} ({:.1f} ms) {}\n", o.pass ? "PASS" : "FAIL", c.id, c.title, ms, o.detail);
  }
  fs::remove_all(scratch);
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
