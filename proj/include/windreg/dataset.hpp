#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "windreg/matrix.hpp"

namespace windreg {

inline constexpr std::size_t kFeatureCount = 4;

/// Feature column order. Indices into Dataset::features.
enum Feature : std::size_t {
  kAirTemperature = 0,
  kBarometricPressure = 1,
  kWindDirection = 2,
  kWindSpeed = 3,
};

inline constexpr std::string_view kTimestampColumn = "timestamp";
inline constexpr std::array<std::string_view, kFeatureCount + 1> kColumnNames = {
    "air_temperature_c", "barometric_pressure_hpa", "wind_direction_deg", "wind_speed_ms",
    "wind_power_kw"};
inline constexpr std::array<std::string_view, kFeatureCount + 1> kColumnUnits = {
    "°C", "hPa", "°", "m/s", "kW"};

using Timestamp = std::chrono::sys_seconds;

/// Wind measurements: n rows of four meteorological features plus wind power.
/// Construct through make_dataset / load_csv / generate_synthetic so the
/// invariants are checked once; the object is immutable afterwards.
class Dataset {
 public:
  Dataset() = default;

  std::size_t size() const noexcept { return target_.size(); }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<double>& target() const noexcept { return target_; }
  const std::optional<std::vector<Timestamp>>& timestamps() const noexcept { return timestamps_; }

  /// Rows of this dataset in the given order (timestamps dropped unless the
  /// selection is strictly increasing).
  Dataset subset(std::span<const std::size_t> rows) const;

  friend Dataset make_dataset(Matrix features, std::vector<double> target,
                              std::optional<std::vector<Timestamp>> timestamps);

 private:
  Matrix features_;
  std::vector<double> target_;
  std::optional<std::vector<Timestamp>> timestamps_;
};

/// Validates and wraps. Throws Error(OutOfRange / LengthMismatch / EmptyDataset).
Dataset make_dataset(Matrix features, std::vector<double> target,
                     std::optional<std::vector<Timestamp>> timestamps = std::nullopt);

/// Optional lets feature-only files load (for prediction); the missing
/// target reads as 0.
enum class TargetColumn { Required, Optional };

Dataset load_csv(const std::filesystem::path& path, TargetColumn target = TargetColumn::Required);
Dataset parse_csv(std::string_view text, TargetColumn target = TargetColumn::Required);
void write_csv(const Dataset& ds, const std::filesystem::path& path);
std::string format_csv(const Dataset& ds);

std::string format_timestamp(Timestamp t);
/// Accepts YYYY-MM-DDTHH:MM:SS with optional trailing 'Z'.
std::optional<Timestamp> parse_timestamp(std::string_view text);

struct ColumnStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, divisor n-1
  double min = 0.0;
  double max = 0.0;
};

struct DatasetSummary {
  std::vector<ColumnStats> columns;  // four features then target
  bool std_undefined = false;        // true when n == 1 (std reported as 0)
};

ColumnStats column_stats(std::string name, std::span<const double> values);
DatasetSummary summarize(const Dataset& ds);

/// Per-feature z-score transform.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> centers, std::vector<double> scales);

  /// Identity transform for p features.
  static Standardizer identity(std::size_t p);

  const std::vector<double>& centers() const noexcept { return centers_; }
  const std::vector<double>& scales() const noexcept { return scales_; }
  std::size_t dimension() const noexcept { return centers_.size(); }

  Matrix transform(const Matrix& x) const;
  void transform_row(std::span<const double> in, std::span<double> out) const;
  Matrix inverse_transform(const Matrix& z) const;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

 private:
  std::vector<double> centers_;
  std::vector<double> scales_;
};

/// Centers are column means, scales are sample stds; a zero std becomes 1.
Standardizer fit_standardizer(const Matrix& features);

struct ClipBounds {
  double lo;
  double hi;
};

struct SynthConfig {
  std::size_t rows = 4464;
  std::uint64_t seed = 1;
  double rated_power_kw = 2100.0;
  double midpoint_speed_ms = 11.0;
  double steepness = 0.75;  // per m/s
  double noise_std_kw = 50.0;

  // Normal parameters for each feature, standardized column order.
  std::array<double, kFeatureCount> feature_mean = {3.9397, 1019.464, 243.1054, 8.654};
  std::array<double, kFeatureCount> feature_std = {2.0408, 13.0539, 55.1089, 4.241};
  std::array<ClipBounds, kFeatureCount> feature_clip = {
      ClipBounds{-5.29, 10.0}, ClipBounds{979.79, 1035.72}, ClipBounds{100.67, 359.78},
      ClipBounds{0.32, 21.07}};
  ClipBounds power_clip = {2.24, 2033.12};

  Timestamp start = Timestamp{std::chrono::sys_days{std::chrono::year{2000} / 1 / 1}};

  void validate() const;
};

/// Logistic power curve, before noise and clipping.
double power_curve(const SynthConfig& cfg, double wind_speed);

Dataset generate_synthetic(const SynthConfig& cfg);

double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace windreg
