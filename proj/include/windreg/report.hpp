#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "windreg/dataset.hpp"
#include "windreg/validation.hpp"

namespace windreg {

// ---- Figures -------------------------------------------------------------

inline constexpr std::size_t kHistogramBins = 20;
inline constexpr std::size_t kDefaultOverlayWindow = 144;  // one day at 10-minute resolution

/// Grid of every column against every other: histograms on the diagonal,
/// scatter plots with Pearson r elsewhere. Throws EmptyDataset when n < 2.
std::string scatter_matrix(const Dataset& ds);

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

struct OverlayWindow {
  std::size_t start = 0;
  std::size_t length = kDefaultOverlayWindow;
};

/// One polyline per series (actual first) across a window of consecutive
/// points. The x axis follows the timestamps when given, else the point index.
std::string overlay_plot(std::span<const Timestamp> timestamps, std::span<const double> actual,
                         std::span<const NamedSeries> predictions, OverlayWindow window = {});

/// Predicted against actual with the y = x reference and the r2_score
/// annotated to three decimals.
std::string fit_plot(std::span<const double> actual, std::span<const double> predicted,
                     const std::string& model_name);

/// The annotation text fit_plot draws, e.g. "R² = 0.912".
std::string r2_annotation(double r2);

// ---- Tables --------------------------------------------------------------

std::string stats_table(const DatasetSummary& summary);
/// Rows: one per fold plus "Average"; one column per result. Throws
/// IncompleteResults when the results are empty or disagree on fold count.
std::string cv_table(std::span<const CvResult> results);
std::string errors_table(const EvalResult& eval);
/// Tree importance plus each model's permutation importance. Throws
/// IncompleteResults if the evaluation has no tree importance.
std::string importance_table(const EvalResult& eval);

/// True when values are non-negative and sum to 1 within tolerance.
bool importance_normalized(std::span<const double> values, double tolerance);

struct ReportInputs {
  const Dataset* dataset = nullptr;
  std::optional<DatasetSummary> summary;
  std::vector<CvResult> cv;
  std::optional<EvalResult> eval;
  OverlayWindow overlay;
};

/// Writes stats.csv, cv.csv, errors.csv, importance.csv, scatter_matrix.svg,
/// overlay.svg and fit_<model>.svg. Throws IncompleteResults if any input is
/// missing. Returns the written paths in write order.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ReportInputs& in);

/// Writes the four CSV tables only.
std::vector<std::filesystem::path> emit_tables(const std::filesystem::path& dir, const DatasetSummary& summary,
                                               std::span<const CvResult> cv, const EvalResult& eval);

}  // namespace windreg
