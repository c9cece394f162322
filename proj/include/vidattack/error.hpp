#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vidattack {

enum class ErrorKind {
  // frameio
  MissingFile,
  DimensionMismatch,
  LabelLengthMismatch,
  MalformedManifest,
  MalformedLabels,
  IoFailure,
  BadSignature,
  UnsupportedColorspace,
  TruncatedFrame,
  // synth / netsim / effects
  InvalidConfig,
  SpanOutOfRange,
  InvalidK,
  AnomalyTooLong,
  TraceMismatch,
  LengthMismatch,
  // detector
  IndexTooSmall,
  TooShort,
  // eval
  DegenerateLabels,
  NoAnomaly,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Thrown by every library operation. `kind()` identifies the failure class so
/// callers (the CLI in particular) can map it to a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vidattack
