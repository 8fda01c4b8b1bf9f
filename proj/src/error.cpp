#include "vsum/error.hpp"

namespace vsum {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyDirectory: return "empty-directory";
    case ErrorKind::UnsupportedFormat: return "unsupported-format";
    case ErrorKind::UnsupportedMaxval: return "unsupported-maxval";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::TruncatedPayload: return "truncated-payload";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::EmptySequence: return "empty-sequence";
    case ErrorKind::BadMagic: return "bad-magic";
    case ErrorKind::RowCountMismatch: return "row-count-mismatch";
    case ErrorKind::NonFiniteValue: return "non-finite-value";
    case ErrorKind::TrailingData: return "trailing-data";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::SegmentOverlap: return "segment-overlap";
    case ErrorKind::LengthMismatch: return "length-mismatch";
    case ErrorKind::NonNumericCell: return "non-numeric-cell";
    case ErrorKind::RaggedRow: return "ragged-row";
    case ErrorKind::ConfigInvalid: return "config-invalid";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error("[" + module + "] " + std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      module_(std::move(module)) {}

}  // namespace vsum
