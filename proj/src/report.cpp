#include "windreg/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "windreg/metrics.hpp"

namespace windreg {

namespace {

constexpr std::array<const char*, 6> kPalette = {"#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  auto s = fmt::format("{:.2f}", v);
  return s == "-0.00" ? "0.00" : s;
}

class SvgWriter {
 public:
  SvgWriter(double width, double height) {
    out_ += fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
        num(width), num(height));
  }

  void raw(std::string_view s) { out_ += s; }

  void text(double x, double y, std::string_view content, std::string_view attrs = {}) {
    out_ += fmt::format("<text x=\"{}\" y=\"{}\"{}{}>{}</text>\n", num(x), num(y), attrs.empty() ? "" : " ", attrs,
                        escape_xml(content));
  }

  void rect(double x, double y, double w, double h, std::string_view attrs) {
    out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" {}/>\n", num(x), num(y), num(w), num(h),
                        attrs);
  }

  void line(double x1, double y1, double x2, double y2, std::string_view attrs) {
    out_ += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>\n", num(x1), num(y1), num(x2), num(y2),
                        attrs);
  }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

struct Range {
  double lo;
  double hi;

  double unit(double v) const { return (v - lo) / (hi - lo); }
};

// Constant data gets a unit-wide range so scaling never divides by zero.
Range range_of(std::span<const double> values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return {*lo - 0.5, *hi + 0.5};
  return {*lo, *hi};
}

Range merge(Range a, Range b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

std::string column_label(std::size_t c) {
  return fmt::format("{} ({})", kColumnNames[c], kColumnUnits[c]);
}

std::string fixed4(double v) { return fmt::format("{:.4f}", v); }
std::string fixed2(double v) { return fmt::format("{:.2f}", v); }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) throw Error(ErrorCode::Io, fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

std::string scatter_matrix(const Dataset& ds) {
  if (ds.size() < 2) throw Error(ErrorCode::EmptyDataset, "scatter matrix needs at least two rows");
  constexpr std::size_t kColumns = kFeatureCount + 1;
  constexpr double kCell = 150.0, kGap = 12.0, kLeft = 70.0, kTop = 40.0;
  const double size = kLeft + kColumns * (kCell + kGap) + 20.0;

  std::vector<std::vector<double>> columns;
  std::vector<Range> ranges;
  for (std::size_t c = 0; c < kFeatureCount; ++c) columns.push_back(ds.features().column(c));
  columns.push_back(ds.target());
  for (const auto& col : columns) ranges.push_back(range_of(col));

  SvgWriter svg(size, size + 20.0);
  svg.text(size / 2, 22, "Scatter matrix of all columns", "text-anchor=\"middle\" font-size=\"14\"");

  for (std::size_t row = 0; row < kColumns; ++row) {
    for (std::size_t col = 0; col < kColumns; ++col) {
      const double x0 = kLeft + static_cast<double>(col) * (kCell + kGap);
      const double y0 = kTop + static_cast<double>(row) * (kCell + kGap);
      const bool diagonal = row == col;
      svg.raw(fmt::format("<g class=\"cell{}\" data-row=\"{}\" data-col=\"{}\">\n", diagonal ? " histogram" : "",
                          kColumnNames[row], kColumnNames[col]));
      svg.rect(x0, y0, kCell, kCell, "fill=\"none\" stroke=\"#999999\"");

      if (diagonal) {
        std::array<std::size_t, kHistogramBins> counts{};
        for (double v : columns[col]) {
          auto bin = static_cast<std::size_t>(ranges[col].unit(v) * static_cast<double>(kHistogramBins));
          counts[std::min(bin, kHistogramBins - 1)]++;
        }
        const double peak = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
        const double bar = kCell / static_cast<double>(kHistogramBins);
        for (std::size_t b = 0; b < kHistogramBins; ++b) {
          const double h = static_cast<double>(counts[b]) / peak * (kCell - 4.0);
          svg.rect(x0 + static_cast<double>(b) * bar, y0 + kCell - h, bar, h,
                   "class=\"bar\" fill=\"#1f77b4\" stroke=\"#ffffff\" stroke-width=\"0.5\"");
        }
      } else {
        std::string d;
        d.reserve(columns[col].size() * 16);
        for (std::size_t i = 0; i < columns[col].size(); ++i) {
          const double px = x0 + ranges[col].unit(columns[col][i]) * kCell;
          const double py = y0 + (1.0 - ranges[row].unit(columns[row][i])) * kCell;
          d += fmt::format("M{},{}h0", num(px), num(py));
        }
        svg.raw(fmt::format("<path class=\"points\" d=\"{}\" stroke=\"#1f77b4\" stroke-opacity=\"0.5\" "
                            "stroke-width=\"2\" stroke-linecap=\"round\" fill=\"none\"/>\n",
                            d));
        svg.text(x0 + 4, y0 + 14, fmt::format("r = {:.3f}", pearson(columns[col], columns[row])),
                 "class=\"pearson\" font-size=\"11\"");
      }
      svg.raw("</g>\n");
    }
  }
  for (std::size_t c = 0; c < kColumns; ++c) {
    const double offset = static_cast<double>(c) * (kCell + kGap) + kCell / 2;
    svg.text(kLeft + offset, kTop + kColumns * (kCell + kGap) + 8, column_label(c),
             "text-anchor=\"middle\" font-size=\"10\"");
    const double y = kTop + offset;
    svg.text(kLeft - 8, y, column_label(c),
             fmt::format("text-anchor=\"middle\" font-size=\"10\" transform=\"rotate(-90 {} {})\"", num(kLeft - 8),
                         num(y)));
  }
  return svg.finish();
}

std::string overlay_plot(std::span<const Timestamp> timestamps, std::span<const double> actual,
                         std::span<const NamedSeries> predictions, OverlayWindow window) {
  if (actual.size() < 2) throw Error(ErrorCode::EmptyInput, "overlay needs at least two points");
  for (const auto& s : predictions)
    if (s.values.size() != actual.size())
      throw Error(ErrorCode::LengthMismatch,
                  fmt::format("series '{}' has {} points, actual has {}", s.name, s.values.size(), actual.size()));
  if (!timestamps.empty() && timestamps.size() != actual.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} timestamps for {} points", timestamps.size(), actual.size()));
  if (window.start >= actual.size() || window.length < 2)
    throw Error(ErrorCode::EmptyInput, "overlay window selects fewer than two points");
  const std::size_t begin = window.start;
  const std::size_t end = std::min(actual.size(), begin + window.length);
  if (end - begin < 2) throw Error(ErrorCode::EmptyInput, "overlay window selects fewer than two points");

  std::vector<NamedSeries> series;
  series.push_back({"actual", std::vector<double>(actual.begin() + begin, actual.begin() + end)});
  for (const auto& s : predictions)
    series.push_back({s.name, std::vector<double>(s.values.begin() + begin, s.values.begin() + end)});

  std::vector<double> xs;
  for (std::size_t i = begin; i < end; ++i)
    xs.push_back(timestamps.empty() ? static_cast<double>(i)
                                    : static_cast<double>((timestamps[i] - timestamps[begin]).count()));
  Range xr = range_of(xs);
  Range yr = range_of(series.front().values);
  for (const auto& s : series) yr = merge(yr, range_of(s.values));

  constexpr double kWidth = 900, kHeight = 420, kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  SvgWriter svg(kWidth, kHeight);
  svg.text(kWidth / 2, 22, "Wind power: actual and predicted", "text-anchor=\"middle\" font-size=\"14\"");
  svg.rect(kLeft, kTop, pw, ph, "fill=\"none\" stroke=\"#999999\"");
  for (int t = 0; t <= 4; ++t) {
    const double v = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    const double y = kTop + (1.0 - yr.unit(v)) * ph;
    svg.line(kLeft - 4, y, kLeft, y, "stroke=\"#999999\"");
    svg.text(kLeft - 6, y + 4, fmt::format("{:.0f}", v), "text-anchor=\"end\" font-size=\"10\"");
  }
  svg.text(18, kTop + ph / 2, "wind power (kW)",
           fmt::format("text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 18 {})\"", num(kTop + ph / 2)));
  svg.text(kLeft + pw / 2, kHeight - 15, timestamps.empty() ? "sample index" : "elapsed time (s)",
           "text-anchor=\"middle\" font-size=\"11\"");

  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string d;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double px = kLeft + xr.unit(xs[i]) * pw;
      const double py = kTop + (1.0 - yr.unit(series[s].values[i])) * ph;
      d += fmt::format("{}{},{}", i == 0 ? "M" : " L", num(px), num(py));
    }
    const char* color = kPalette[s % kPalette.size()];
    svg.raw(fmt::format("<path class=\"series\" data-name=\"{}\" d=\"{}\" fill=\"none\" stroke=\"{}\" "
                        "stroke-width=\"1.5\"/>\n",
                        escape_xml(series[s].name), d, color));
    const double ly = kTop + 10 + static_cast<double>(s) * 18;
    svg.raw("<g class=\"legend-entry\">\n");
    svg.line(kWidth - kRight + 15, ly, kWidth - kRight + 40, ly, fmt::format("stroke=\"{}\" stroke-width=\"2\"", color));
    svg.text(kWidth - kRight + 46, ly + 4, series[s].name, "font-size=\"11\"");
    svg.raw("</g>\n");
  }
  return svg.finish();
}

std::string r2_annotation(double r2) {
  auto s = fmt::format("{:.3f}", r2);
  if (s == "-0.000") s = "0.000";
  return "R² = " + s;
}

std::string fit_plot(std::span<const double> actual, std::span<const double> predicted,
                     const std::string& model_name) {
  if (actual.size() != predicted.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} actual values but {} predictions", actual.size(), predicted.size()));
  if (actual.size() < 2) throw Error(ErrorCode::EmptyInput, "fit plot needs at least two points");
  const double r2 = r2_score(actual, predicted);
  const Range r = merge(range_of(actual), range_of(predicted));

  constexpr double kSize = 480, kLeft = 70, kTop = 40, kPlot = 380;
  SvgWriter svg(kSize, kSize);
  svg.text(kSize / 2, 22, fmt::format("Fit of {} regression", model_name), "text-anchor=\"middle\" font-size=\"14\"");
  svg.rect(kLeft, kTop, kPlot, kPlot, "fill=\"none\" stroke=\"#999999\"");
  svg.line(kLeft, kTop + kPlot, kLeft + kPlot, kTop, "class=\"reference\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"");

  std::string d;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double px = kLeft + r.unit(actual[i]) * kPlot;
    const double py = kTop + (1.0 - r.unit(predicted[i])) * kPlot;
    d += fmt::format("M{},{}h0", num(px), num(py));
  }
  svg.raw(fmt::format("<path class=\"points\" d=\"{}\" stroke=\"#1f77b4\" stroke-opacity=\"0.6\" stroke-width=\"3\" "
                      "stroke-linecap=\"round\" fill=\"none\"/>\n",
                      d));
  svg.text(kLeft + 10, kTop + 20, r2_annotation(r2), "class=\"annotation\" font-size=\"13\"");
  svg.text(kLeft + kPlot / 2, kTop + kPlot + 35, "actual wind power (kW)", "text-anchor=\"middle\" font-size=\"11\"");
  svg.text(20, kTop + kPlot / 2, "predicted wind power (kW)",
           fmt::format("text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 20 {})\"", num(kTop + kPlot / 2)));
  svg.text(kLeft, kTop + kPlot + 15, fmt::format("{:.0f}", r.lo), "font-size=\"10\"");
  svg.text(kLeft + kPlot, kTop + kPlot + 15, fmt::format("{:.0f}", r.hi), "text-anchor=\"end\" font-size=\"10\"");
  return svg.finish();
}

std::string stats_table(const DatasetSummary& summary) {
  if (summary.columns.empty()) throw Error(ErrorCode::IncompleteResults, "no column statistics");
  std::string out = "column,mean,std,min,max\n";
  for (const auto& c : summary.columns)
    out += fmt::format("{},{},{},{},{}\n", c.name, fixed4(c.mean), fixed4(c.std), fixed4(c.min), fixed4(c.max));
  return out;
}

std::string cv_table(std::span<const CvResult> results) {
  if (results.empty()) throw Error(ErrorCode::IncompleteResults, "no cross-validation results");
  const std::size_t folds = results.front().folds.size();
  for (const auto& r : results)
    if (r.folds.size() != folds || folds == 0)
      throw Error(ErrorCode::IncompleteResults, "cross-validation results disagree on fold count");
  std::string out = "fold";
  for (const auto& r : results) out += fmt::format(",{}", to_string(r.algorithm));
  out += '\n';
  for (std::size_t f = 0; f < folds; ++f) {
    out += std::to_string(f);
    for (const auto& r : results) out += "," + fixed4(r.folds[f].score);
    out += '\n';
  }
  out += "Average";
  for (const auto& r : results) out += "," + fixed4(r.average);
  out += '\n';
  return out;
}

std::string errors_table(const EvalResult& eval) {
  if (eval.models.empty()) throw Error(ErrorCode::IncompleteResults, "no evaluated models");
  std::string out = "model,mae_kw,r2_score,r2_ratio,rmse_kw,k\n";
  for (const auto& m : eval.models)
    out += fmt::format("{},{},{},{},{},{}\n", to_string(m.spec.algorithm), fixed2(m.scores.mae),
                       fixed4(m.scores.r2_score), fixed4(m.scores.r2_ratio), fixed4(m.scores.rmse),
                       m.chosen_k ? std::to_string(*m.chosen_k) : "");
  return out;
}

bool importance_normalized(std::span<const double> values, double tolerance) {
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

std::string importance_table(const EvalResult& eval) {
  if (!eval.tree_importance) throw Error(ErrorCode::IncompleteResults, "no tree importance in the evaluation");
  const auto& tree = eval.tree_importance->values;
  if (tree.size() != kFeatureCount || !importance_normalized(tree, 1e-9))
    throw Error(ErrorCode::IncompleteResults, "tree importance is not a normalized vector");
  std::string out = "feature,tree";
  for (const auto& m : eval.models) out += fmt::format(",{}_permutation", to_string(m.spec.algorithm));
  out += '\n';
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    out += fmt::format("{},{}", kColumnNames[f], fixed4(tree[f]));
    for (const auto& m : eval.models) out += "," + fixed4(m.permutation_importance.at(f));
    out += '\n';
  }
  return out;
}

std::vector<std::filesystem::path> emit_tables(const std::filesystem::path& dir, const DatasetSummary& summary,
                                               std::span<const CvResult> cv, const EvalResult& eval) {
  const std::array<std::pair<const char*, std::string>, 4> tables = {{
      {"stats.csv", stats_table(summary)},
      {"cv.csv", cv_table(cv)},
      {"errors.csv", errors_table(eval)},
      {"importance.csv", importance_table(eval)},
  }};
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : tables) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  }
  return written;
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ReportInputs& in) {
  if (!in.dataset || !in.summary || in.cv.empty() || !in.eval)
    throw Error(ErrorCode::IncompleteResults, "report needs dataset, summary, cross-validation and evaluation");
  const auto& eval = *in.eval;

  // Build every document before touching the filesystem.
  std::vector<std::pair<std::string, std::string>> figures;
  figures.emplace_back("scatter_matrix.svg", scatter_matrix(*in.dataset));

  std::vector<Timestamp> test_times;
  if (in.dataset->timestamps())
    test_times = select<Timestamp>(*in.dataset->timestamps(), eval.split.test);
  std::vector<NamedSeries> series;
  for (const auto& m : eval.models) series.push_back({std::string(to_string(m.spec.algorithm)), m.test_predictions});
  figures.emplace_back("overlay.svg", overlay_plot(test_times, eval.test_actual, series, in.overlay));
  for (const auto& m : eval.models)
    figures.emplace_back(fmt::format("fit_{}.svg", to_string(m.spec.algorithm)),
                         fit_plot(eval.test_actual, m.test_predictions, std::string(to_string(m.spec.algorithm))));

  auto written = emit_tables(dir, *in.summary, in.cv, eval);
  for (const auto& [name, content] : figures) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace windreg
