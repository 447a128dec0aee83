#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nmrsq {

enum class ErrorKind {
  InvalidDimension,
  UnknownSlot,
  DimensionMismatch,
  SpaceMismatch,
  TruncationTooSmall,
  NotHermitian,
  NotAntiHermitian,
  DegenerateMixingAngle,
  ZeroDetuning,
  Domain,
  PropagationAccuracy,
  StepSize,
  Config,
  Io,
  Validation,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so that the C API and
/// the CLI can map it onto status and exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Configuration-class errors (exit code 1); everything else is numerical.
  bool is_configuration() const noexcept;

 private:
  ErrorKind kind_;
};

}  // namespace nmrsq
