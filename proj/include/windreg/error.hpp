#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace windreg {

enum class ErrorCode {
  // dataset / input data
  MissingColumn,
  NonNumericCell,
  OutOfRange,
  EmptyFile,
  EmptyDataset,
  LengthMismatch,
  EmptyInput,
  ConstantActual,
  DegenerateSplit,
  IncompleteResults,
  Io,
  // models
  RankDeficient,
  TooFewRows,
  DimensionMismatch,
  InvalidK,
  InvalidCandidate,
  InvalidParams,
  CorruptFile,
  VersionMismatch,
  // command line
  Usage,
};

std::string_view to_string(ErrorCode code);

/// Error category used by the command line to pick an exit status.
enum class ErrorCategory { Data, Model, Usage };

ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by load_csv for a bad cell. Row is 1-based over data rows (header excluded).
class CellError : public Error {
 public:
  CellError(ErrorCode code, std::size_t row, std::string column, const std::string& detail)
      : Error(code, "row " + std::to_string(row) + ", column " + column + ": " + detail),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace windreg
