#include "nmrsq/error.hpp"

namespace nmrsq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::UnknownSlot: return "unknown-slot";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::SpaceMismatch: return "space-mismatch";
    case ErrorKind::TruncationTooSmall: return "truncation-too-small";
    case ErrorKind::NotHermitian: return "not-hermitian";
    case ErrorKind::NotAntiHermitian: return "not-anti-hermitian";
    case ErrorKind::DegenerateMixingAngle: return "degenerate-mixing-angle";
    case ErrorKind::ZeroDetuning: return "zero-detuning";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::PropagationAccuracy: return "propagation-accuracy";
    case ErrorKind::StepSize: return "step-size";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Validation: return "validation";
  }
  return "unknown";
}

bool Error::is_configuration() const noexcept {
  switch (kind_) {
    case ErrorKind::Config:
    case ErrorKind::Io:
    case ErrorKind::DegenerateMixingAngle:
    case ErrorKind::UnknownSlot:
      return true;
    default:
      return false;
  }
}

}  // namespace nmrsq
