#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vsum {

/// Every failure the library reports carries one of these kinds, so callers
/// (and the CLI exit-code mapping) can branch on it without parsing text.
enum class ErrorKind {
  // frame_ingest
  EmptyDirectory,
  UnsupportedFormat,
  UnsupportedMaxval,
  DimensionMismatch,
  TruncatedPayload,
  Io,
  // features
  EmptySequence,
  BadMagic,
  RowCountMismatch,
  NonFiniteValue,
  TrailingData,
  // clustering / selection / skim
  InvalidArgument,
  SegmentOverlap,
  // eval
  LengthMismatch,
  NonNumericCell,
  RaggedRow,
  // cli
  ConfigInvalid,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace vsum
