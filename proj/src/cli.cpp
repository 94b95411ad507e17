#include "windreg/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "windreg/dataset.hpp"
#include "windreg/model_io.hpp"
#include "windreg/report.hpp"
#include "windreg/validation.hpp"

namespace windreg::cli {

namespace {

struct ModelOptions {
  std::size_t k = 0;  // 0 = choose by cross-validation
  std::size_t k_max = 25;
  std::size_t inner_folds = kDefaultInnerFolds;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;
};

struct RunConfig {
  std::string data;
  std::string out;
  std::string model_file;
  std::vector<std::string> models;
  std::uint64_t seed = kDefaultSeed;
  double test_fraction = 0.2;
  std::size_t folds = 10;
  std::size_t repeats = 5;
  unsigned threads = 1;
  bool chronological = false;
  std::string metric = "r2_score";
  std::size_t rows = 4464;
  double noise = 50.0;
  std::size_t window_start = 0;
  std::size_t window_length = kDefaultOverlayWindow;
  ModelOptions model;
};

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnvVar);
  if (!env || !*env) return kDefaultSeed;
  std::uint64_t v = 0;
  const std::string_view s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::Usage, fmt::format("{}='{}' is not an unsigned integer", kSeedEnvVar, s));
  return v;
}

unsigned thread_count(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

RegressorSpec make_spec(Algorithm a, const RunConfig& cfg) {
  RegressorSpec spec = default_spec(a, cfg.seed);
  const auto& m = cfg.model;
  if (m.k != 0) spec.knn.fixed_k = m.k;
  spec.knn.candidates.clear();
  for (std::size_t k = 1; k <= m.k_max; ++k) spec.knn.candidates.push_back(k);
  spec.knn.inner_folds = m.inner_folds;
  if (m.max_depth != 0) spec.tree.max_depth = m.max_depth;
  spec.tree.min_samples_split = m.min_samples_split;
  spec.tree.min_samples_leaf = m.min_samples_leaf;
  spec.tree.min_impurity_decrease = m.min_impurity_decrease;
  return spec;
}

std::vector<RegressorSpec> make_specs(const RunConfig& cfg) {
  std::vector<RegressorSpec> specs;
  const std::vector<std::string> all = {"linear", "knn", "tree"};
  for (const auto& name : cfg.models.empty() ? all : cfg.models) {
    auto a = parse_algorithm(name);
    if (!a) throw Error(ErrorCode::Usage, fmt::format("unknown model '{}'", name));
    specs.push_back(make_spec(*a, cfg));
  }
  return specs;
}

Metric parse_metric(const std::string& name) {
  if (name == "r2_score") return Metric::R2Score;
  if (name == "r2_ratio") return Metric::R2Ratio;
  if (name == "mae") return Metric::Mae;
  if (name == "rmse") return Metric::Rmse;
  throw Error(ErrorCode::Usage, fmt::format("unknown metric '{}'", name));
}

EvalConfig eval_config(const RunConfig& cfg) {
  EvalConfig e;
  e.test_fraction = cfg.test_fraction;
  e.seed = cfg.seed;
  e.mode = cfg.chronological ? SplitMode::Chronological : SplitMode::Shuffled;
  e.permutation_repeats = cfg.repeats;
  e.threads = thread_count(cfg.threads);
  return e;
}

std::vector<CvResult> run_cv(const std::vector<RegressorSpec>& specs, const Dataset& ds, const RunConfig& cfg) {
  const auto folds = kfold(ds.size(), cfg.folds, cfg.seed);
  const Metric metric = parse_metric(cfg.metric);
  std::vector<CvResult> results;
  for (const auto& spec : specs) results.push_back(cross_validate(spec, ds, folds, metric, thread_count(cfg.threads)));
  return results;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  if (!f) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void add_seed(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, fmt::format("Master random seed (env {} overrides the default)", kSeedEnvVar))
      ->capture_default_str();
}

void add_threads(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--threads", cfg.threads, "Worker threads for fold evaluation (0 = all cores)")
      ->capture_default_str();
}

void add_model_options(CLI::App* sub, RunConfig& cfg) {
  auto& m = cfg.model;
  sub->add_option("--k", m.k, "kNN neighbor count (0 = select by cross-validated RMSE)")->capture_default_str();
  sub->add_option("--k-max", m.k_max, "kNN search tries k = 1..k-max")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--inner-folds", m.inner_folds, "Folds for the kNN k search")->capture_default_str();
  sub->add_option("--max-depth", m.max_depth, "Tree depth limit (0 = unlimited)")->capture_default_str();
  sub->add_option("--min-samples-split", m.min_samples_split, "Smallest tree node that may split")
      ->capture_default_str();
  sub->add_option("--min-samples-leaf", m.min_samples_leaf, "Smallest tree leaf")->capture_default_str();
  sub->add_option("--min-impurity-decrease", m.min_impurity_decrease, "Required impurity decrease per split (kW^2)")
      ->capture_default_str();
}

void add_models(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.models, "Models to run: linear, knn, tree (repeatable; default all three)")
      ->check(CLI::IsMember({"linear", "knn", "tree"}));
}

void add_split(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--test-fraction", cfg.test_fraction, "Held-out fraction of rows")->capture_default_str();
  sub->add_flag("--chronological", cfg.chronological, "Hold out the last rows instead of a random sample");
  sub->add_option("--repeats", cfg.repeats, "Shuffles per feature for permutation importance")->capture_default_str();
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg.seed = default_seed();
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitUsage;
  }

  CLI::App app{"Wind power regression toolkit: linear, kNN and tree regressors with cross-validation", "windreg"};
  app.require_subcommand(1, 1);

  auto* stats = app.add_subcommand("stats", "Print per-column mean, std, min and max of a dataset");
  stats->add_option("data", cfg.data, "Input CSV")->required();
  stats->add_option("--out", cfg.out, "Also write the table to this CSV file");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with the wind-farm column layout");
  synth->add_option("--rows", cfg.rows, "Row count")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--noise", cfg.noise, "Gaussian noise std on wind power (kW)")->capture_default_str();
  synth->add_option("--out", cfg.out, "Output CSV")->required();
  add_seed(synth, cfg);

  auto* train = app.add_subcommand("train", "Fit one model on a whole dataset and save it");
  train->add_option("--model", cfg.models, "linear, knn or tree")
      ->required()
      ->expected(1)
      ->check(CLI::IsMember({"linear", "knn", "tree"}));
  train->add_option("--data", cfg.data, "Training CSV")->required();
  train->add_option("--out", cfg.out, "Model file to write (JSON)")->required();
  add_seed(train, cfg);
  add_threads(train, cfg);
  add_model_options(train, cfg);

  auto* predict_cmd = app.add_subcommand("predict", "Print one prediction (kW) per input row");
  predict_cmd->add_option("--model-file", cfg.model_file, "Model file from 'train'")->required();
  predict_cmd->add_option("--data", cfg.data, "CSV with the feature columns")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Train/test evaluation: MAE, RMSE and both R2 variants");
  evaluate_cmd->add_option("--data", cfg.data, "Input CSV")->required();
  evaluate_cmd->add_option("--out", cfg.out, "Also write errors.csv to this file");
  add_models(evaluate_cmd, cfg);
  add_seed(evaluate_cmd, cfg);
  add_split(evaluate_cmd, cfg);
  add_threads(evaluate_cmd, cfg);
  add_model_options(evaluate_cmd, cfg);

  auto* cv = app.add_subcommand("cv", "K-fold cross-validation scores per fold and their average");
  cv->add_option("--data", cfg.data, "Input CSV")->required();
  cv->add_option("--folds", cfg.folds, "Fold count")->capture_default_str();
  cv->add_option("--metric", cfg.metric, "Fold score: r2_score, r2_ratio, mae or rmse")
      ->capture_default_str()
      ->check(CLI::IsMember({"r2_score", "r2_ratio", "mae", "rmse"}));
  cv->add_option("--out", cfg.out, "Also write cv.csv to this file");
  add_models(cv, cfg);
  add_seed(cv, cfg);
  add_threads(cv, cfg);
  add_model_options(cv, cfg);

  auto* importance = app.add_subcommand("importance", "Tree impurity importance and permutation importance");
  importance->add_option("--data", cfg.data, "Input CSV")->required();
  importance->add_option("--out", cfg.out, "Also write importance.csv to this file");
  add_seed(importance, cfg);
  add_split(importance, cfg);
  add_threads(importance, cfg);
  add_model_options(importance, cfg);

  auto* compare = app.add_subcommand("compare", "Full experiment: stats, cross-validation, evaluation, figures");
  compare->add_option("--data", cfg.data, "Input CSV")->required();
  compare->add_option("--out", cfg.out, "Report directory")->required();
  compare->add_option("--folds", cfg.folds, "Fold count")->capture_default_str();
  compare->add_option("--window-start", cfg.window_start, "First held-out point shown in overlay.svg")
      ->capture_default_str();
  compare->add_option("--window-length", cfg.window_length, "Points shown in overlay.svg")->capture_default_str();
  add_seed(compare, cfg);
  add_split(compare, cfg);
  add_threads(compare, cfg);
  add_model_options(compare, cfg);

  auto* report = app.add_subcommand("report", "Descriptive report: stats.csv and scatter_matrix.svg");
  report->add_option("--data", cfg.data, "Input CSV")->required();
  report->add_option("--out", cfg.out, "Report directory")->required();

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto selected = app.get_subcommands();
    out << (selected.empty() ? app.help() : selected.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "usage error: {}\n", e.what());
    return kExitUsage;
  }

  try {
    if (*stats) {
      const auto ds = load_csv(cfg.data);
      const auto summary = summarize(ds);
      const auto table = stats_table(summary);
      out << table;
      if (summary.std_undefined) fmt::print(err, "warning: one row only; std reported as 0\n");
      if (!cfg.out.empty()) write_text(cfg.out, table);
    } else if (*synth) {
      SynthConfig sc;
      sc.rows = cfg.rows;
      sc.seed = cfg.seed;
      sc.noise_std_kw = cfg.noise;
      write_csv(generate_synthetic(sc), cfg.out);
    } else if (*train) {
      const auto ds = load_csv(cfg.data);
      const auto spec = make_spec(*parse_algorithm(cfg.models.front()), cfg);
      ModelFile file{kModelFormatVersion,
                     fit_regressor(spec, ds.features(), ds.target(), thread_count(cfg.threads)),
                     {ds.size(), std::vector<std::string>(kColumnNames.begin(), kColumnNames.end()), cfg.seed}};
      save_model(file, cfg.out);
      if (const auto* knn = std::get_if<KnnModel>(&file.model)) fmt::print(err, "selected k = {}\n", knn->k());
    } else if (*predict_cmd) {
      const auto file = load_model(cfg.model_file);
      const auto ds = load_csv(cfg.data, TargetColumn::Optional);
      for (double v : predict(file.model, ds.features())) out << shortest(v) << '\n';
    } else if (*evaluate_cmd) {
      const auto ds = load_csv(cfg.data);
      const auto specs = make_specs(cfg);
      const auto eval = evaluate(specs, ds, eval_config(cfg));
      const auto table = errors_table(eval);
      out << table;
      if (!cfg.out.empty()) write_text(cfg.out, table);
    } else if (*cv) {
      const auto ds = load_csv(cfg.data);
      const auto results = run_cv(make_specs(cfg), ds, cfg);
      const auto table = cv_table(results);
      out << table;
      if (!cfg.out.empty()) write_text(cfg.out, table);
    } else if (*importance) {
      const auto ds = load_csv(cfg.data);
      const auto specs = make_specs(cfg);
      const auto eval = evaluate(specs, ds, eval_config(cfg));
      const auto table = importance_table(eval);
      out << table;
      if (eval.tree_importance && eval.tree_importance->uniform_fallback)
        fmt::print(err, "warning: tree has no splits; importance is uniform\n");
      if (!cfg.out.empty()) write_text(cfg.out, table);
    } else if (*compare) {
      const auto ds = load_csv(cfg.data);
      const auto specs = make_specs(cfg);
      ReportInputs in;
      in.dataset = &ds;
      in.summary = summarize(ds);
      in.cv = run_cv(specs, ds, cfg);
      in.eval = evaluate(specs, ds, eval_config(cfg));
      in.overlay = {cfg.window_start, cfg.window_length};
      for (const auto& path : write_report(cfg.out, in)) out << path.string() << '\n';
      out << errors_table(*in.eval);
    } else if (*report) {
      const auto ds = load_csv(cfg.data);
      const std::filesystem::path dir(cfg.out);
      std::filesystem::create_directories(dir);
      const std::array<std::pair<const char*, std::string>, 2> files = {{
          {"stats.csv", stats_table(summarize(ds))},
          {"scatter_matrix.svg", scatter_matrix(ds)},
      }};
      for (const auto& [name, content] : files) {
        write_text(dir / name, content);
        out << (dir / name).string() << '\n';
      }
    }
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    switch (category_of(e.code())) {
      case ErrorCategory::Usage: return kExitUsage;
      case ErrorCategory::Model: return kExitModel;
      case ErrorCategory::Data: return kExitData;
    }
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitData;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace windreg::cli
