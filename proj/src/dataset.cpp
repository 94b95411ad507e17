#include "windreg/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace windreg {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Domain check for one feature value; returns a description when violated.
std::optional<std::string> range_violation(std::size_t feature, double v) {
  switch (feature) {
    case kWindDirection:
      if (v < 0.0 || v >= 360.0) return fmt::format("{} outside [0, 360)", v);
      break;
    case kWindSpeed:
      if (v < 0.0) return fmt::format("{} is negative", v);
      break;
    case kBarometricPressure:
      if (v <= 0.0) return fmt::format("{} is not positive", v);
      break;
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace

Dataset make_dataset(Matrix features, std::vector<double> target,
                     std::optional<std::vector<Timestamp>> timestamps) {
  if (target.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no rows");
  if (features.cols() != kFeatureCount)
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("expected {} feature columns, got {}", kFeatureCount, features.cols()));
  if (features.rows() != target.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} feature rows but {} targets", features.rows(), target.size()));
  if (timestamps && timestamps->size() != target.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} timestamps but {} rows", timestamps->size(), target.size()));

  for (std::size_t r = 0; r < features.rows(); ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const double v = features(r, c);
      if (!std::isfinite(v))
        throw CellError(ErrorCode::OutOfRange, r + 1, std::string(kColumnNames[c]), "not finite");
      if (auto why = range_violation(c, v))
        throw CellError(ErrorCode::OutOfRange, r + 1, std::string(kColumnNames[c]), *why);
    }
    if (!std::isfinite(target[r]))
      throw CellError(ErrorCode::OutOfRange, r + 1, std::string(kColumnNames[kFeatureCount]),
                      "not finite");
    if (timestamps && r > 0 && (*timestamps)[r] <= (*timestamps)[r - 1])
      throw CellError(ErrorCode::OutOfRange, r + 1, std::string(kTimestampColumn),
                      "timestamps must be strictly increasing");
  }

  Dataset ds;
  ds.features_ = std::move(features);
  ds.target_ = std::move(target);
  ds.timestamps_ = std::move(timestamps);
  return ds;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix f = features_.select_rows(rows);
  std::vector<double> t = select<double>(target_, rows);
  std::optional<std::vector<Timestamp>> ts;
  if (timestamps_ && std::is_sorted(rows.begin(), rows.end()) &&
      std::adjacent_find(rows.begin(), rows.end()) == rows.end())
    ts = select<Timestamp>(*timestamps_, rows);
  return make_dataset(std::move(f), std::move(t), std::move(ts));
}

std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':')
    return std::nullopt;
  auto field = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (ec != std::errc() || ptr != text.data() + pos + len) return std::nullopt;
    return v;
  };
  auto y = field(0, 4), mo = field(5, 2), d = field(8, 2), h = field(11, 2), mi = field(14, 2),
       s = field(17, 2);
  if (!y || !mo || !d || !h || !mi || !s) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{*y},
                                        std::chrono::month{static_cast<unsigned>(*mo)},
                                        std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *s > 59) return std::nullopt;
  return Timestamp{std::chrono::sys_days{ymd}} + std::chrono::hours{*h} +
         std::chrono::minutes{*mi} + std::chrono::seconds{*s};
}

Dataset parse_csv(std::string_view text, TargetColumn target_column) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto pos = text.find('\n', start);
      auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
      if (!trim(line).empty()) lines.push_back(line);
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::EmptyFile, "no header row");

  auto header = split_fields(lines.front());
  for (auto& h : header) h = trim(h);
  const bool has_timestamp = !header.empty() && header.front() == kTimestampColumn;
  const std::size_t offset = has_timestamp ? 1 : 0;
  const bool has_target = target_column == TargetColumn::Required ||
                          std::find(header.begin(), header.end(), kColumnNames.back()) != header.end();
  const std::span<const std::string_view> expected(kColumnNames.data(),
                                                   has_target ? kColumnNames.size() : kFeatureCount);
  for (auto name : expected) {
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw Error(ErrorCode::MissingColumn, fmt::format("header lacks column '{}'", name));
  }
  if (header.size() != expected.size() + offset || !std::equal(expected.begin(), expected.end(), header.begin() + offset))
    throw Error(ErrorCode::MissingColumn,
                fmt::format("header must be '{}{}'", has_timestamp ? "timestamp," : "", fmt::join(expected, ",")));
  if (lines.size() < 2) throw Error(ErrorCode::EmptyFile, "no data rows");

  const std::size_t n = lines.size() - 1;
  Matrix features(n, kFeatureCount);
  std::vector<double> target(n);
  std::optional<std::vector<Timestamp>> timestamps;
  if (has_timestamp) timestamps.emplace(n);

  for (std::size_t r = 0; r < n; ++r) {
    const auto fields = split_fields(lines[r + 1]);
    const std::size_t row = r + 1;
    auto column_name = [&](std::size_t field) {
      return field < offset ? std::string(kTimestampColumn) : std::string(kColumnNames[field - offset]);
    };
    if (fields.size() != header.size()) {
      const std::size_t missing = std::min(fields.size(), header.size() - 1);
      throw CellError(ErrorCode::NonNumericCell, row, column_name(missing),
                      fmt::format("expected {} fields, found {}", header.size(), fields.size()));
    }
    if (has_timestamp) {
      auto t = parse_timestamp(fields[0]);
      if (!t)
        throw CellError(ErrorCode::NonNumericCell, row, column_name(0),
                        fmt::format("'{}' is not an ISO-8601 timestamp", trim(fields[0])));
      (*timestamps)[r] = *t;
      if (r > 0 && (*timestamps)[r] <= (*timestamps)[r - 1])
        throw CellError(ErrorCode::OutOfRange, row, column_name(0), "timestamps must be strictly increasing");
    }
    for (std::size_t c = 0; c < expected.size(); ++c) {
      auto v = parse_double(fields[c + offset]);
      if (!v || !std::isfinite(*v))
        throw CellError(ErrorCode::NonNumericCell, row, column_name(c + offset),
                        fmt::format("'{}' is not a finite number", trim(fields[c + offset])));
      if (c < kFeatureCount) {
        if (auto why = range_violation(c, *v))
          throw CellError(ErrorCode::OutOfRange, row, column_name(c + offset), *why);
        features(r, c) = *v;
      } else {
        target[r] = *v;
      }
    }
  }
  return make_dataset(std::move(features), std::move(target), std::move(timestamps));
}

Dataset load_csv(const std::filesystem::path& path, TargetColumn target) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), target);
}

std::string format_csv(const Dataset& ds) {
  std::string out;
  if (ds.timestamps()) out += "timestamp,";
  out += fmt::format("{}\n", fmt::join(kColumnNames, ","));
  for (std::size_t r = 0; r < ds.size(); ++r) {
    if (ds.timestamps()) {
      out += format_timestamp((*ds.timestamps())[r]);
      out += ',';
    }
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      out += format_double(ds.features()(r, c));
      out += ',';
    }
    out += format_double(ds.target()[r]);
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << format_csv(ds);
  if (!out) throw Error(ErrorCode::Io, fmt::format("write to '{}' failed", path.string()));
}

ColumnStats column_stats(std::string name, std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "column has no values");
  ColumnStats s;
  s.name = std::move(name);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  if (s.min == s.max) {
    s.mean = s.min;
    s.std = 0.0;
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = std::clamp(sum / static_cast<double>(values.size()), s.min, s.max);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

DatasetSummary summarize(const Dataset& ds) {
  DatasetSummary summary;
  summary.std_undefined = ds.size() < 2;
  for (std::size_t c = 0; c < kFeatureCount; ++c)
    summary.columns.push_back(column_stats(std::string(kColumnNames[c]), ds.features().column(c)));
  summary.columns.push_back(column_stats(std::string(kColumnNames[kFeatureCount]), ds.target()));
  return summary;
}

Standardizer::Standardizer(std::vector<double> centers, std::vector<double> scales)
    : centers_(std::move(centers)), scales_(std::move(scales)) {
  if (centers_.size() != scales_.size())
    throw Error(ErrorCode::DimensionMismatch, "standardizer centers and scales differ in length");
  for (double s : scales_)
    if (!(s > 0.0) || !std::isfinite(s))
      throw Error(ErrorCode::InvalidParams, "standardizer scales must be positive and finite");
}

Standardizer Standardizer::identity(std::size_t p) {
  return Standardizer(std::vector<double>(p, 0.0), std::vector<double>(p, 1.0));
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
  if (in.size() != centers_.size() || out.size() != centers_.size())
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("expected {} features, got {}", centers_.size(), in.size()));
  for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - centers_[c]) / scales_[c];
}

Matrix Standardizer::transform(const Matrix& x) const {
  Matrix z(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) transform_row(x.row(r), z.row(r));
  return z;
}

Matrix Standardizer::inverse_transform(const Matrix& z) const {
  if (z.cols() != centers_.size())
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("expected {} features, got {}", centers_.size(), z.cols()));
  Matrix x(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < z.cols(); ++c) x(r, c) = z(r, c) * scales_[c] + centers_[c];
  return x;
}

Standardizer fit_standardizer(const Matrix& features) {
  if (features.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot fit a standardizer on zero rows");
  std::vector<double> centers, scales;
  for (std::size_t c = 0; c < features.cols(); ++c) {
    const auto col = features.column(c);
    const auto s = column_stats("", col);
    centers.push_back(s.mean);
    scales.push_back(s.std > 0.0 ? s.std : 1.0);
  }
  return Standardizer(std::move(centers), std::move(scales));
}

void SynthConfig::validate() const {
  if (rows < 1) throw Error(ErrorCode::InvalidParams, "synthetic row count must be at least 1");
  if (!(rated_power_kw > 0.0)) throw Error(ErrorCode::InvalidParams, "rated power must be positive");
  if (!(noise_std_kw >= 0.0)) throw Error(ErrorCode::InvalidParams, "noise std must be non-negative");
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (!(feature_std[c] >= 0.0)) throw Error(ErrorCode::InvalidParams, "feature std must be non-negative");
    if (!(feature_clip[c].lo <= feature_clip[c].hi))
      throw Error(ErrorCode::InvalidParams, "clip bounds inverted");
    if (range_violation(c, feature_clip[c].lo) || range_violation(c, feature_clip[c].hi))
      throw Error(ErrorCode::InvalidParams,
                  fmt::format("clip bounds for {} violate the column domain", kColumnNames[c]));
  }
  if (!(power_clip.lo <= power_clip.hi)) throw Error(ErrorCode::InvalidParams, "power clip bounds inverted");
}

double power_curve(const SynthConfig& cfg, double wind_speed) {
  return cfg.rated_power_kw / (1.0 + std::exp(-cfg.steepness * (wind_speed - cfg.midpoint_speed_ms)));
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix features(cfg.rows, kFeatureCount);
  std::vector<double> target(cfg.rows);
  std::vector<Timestamp> timestamps(cfg.rows);
  for (std::size_t r = 0; r < cfg.rows; ++r) {
    for (std::size_t c = 0; c < kFeatureCount; ++c) {
      const double v = cfg.feature_mean[c] + cfg.feature_std[c] * normal(rng);
      features(r, c) = std::clamp(v, cfg.feature_clip[c].lo, cfg.feature_clip[c].hi);
    }
    const double noise = cfg.noise_std_kw * normal(rng);
    target[r] = std::clamp(power_curve(cfg, features(r, kWindSpeed)) + noise, cfg.power_clip.lo,
                           cfg.power_clip.hi);
    timestamps[r] = cfg.start + std::chrono::minutes{10} * static_cast<long>(r);
  }
  return make_dataset(std::move(features), std::move(target), std::move(timestamps));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "pearson inputs differ in length");
  if (a.size() < 2) throw Error(ErrorCode::EmptyInput, "pearson needs at least two points");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace windreg
