#include "windreg/error.hpp"

namespace windreg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConstantActual: return "ConstantActual";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::IncompleteResults: return "IncompleteResults";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::InvalidCandidate: return "InvalidCandidate";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::Usage: return "UsageError";
  }
  return "Error";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::RankDeficient:
    case ErrorCode::TooFewRows:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidK:
    case ErrorCode::InvalidCandidate:
    case ErrorCode::InvalidParams:
    case ErrorCode::CorruptFile:
    case ErrorCode::VersionMismatch:
      return ErrorCategory::Model;
    case ErrorCode::Usage:
      return ErrorCategory::Usage;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace windreg
