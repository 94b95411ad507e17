#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "windreg/validation.hpp"

namespace windreg {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "windreg-model";

struct ModelMetadata {
  std::size_t rows = 0;
  std::vector<std::string> columns;
  std::uint64_t seed = 0;

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

struct ModelFile {
  int version = kModelFormatVersion;
  FittedModel model;
  ModelMetadata metadata;
};

/// JSON text of a model file. Doubles are written with round-trip precision,
/// so loading restores every coefficient bit for bit. kNN files embed the
/// full standardized training set and can be large.
std::string serialize_model(const ModelFile& file);
/// Throws CorruptFile on malformed input and VersionMismatch on a format
/// version other than kModelFormatVersion.
ModelFile deserialize_model(std::string_view text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace windreg
