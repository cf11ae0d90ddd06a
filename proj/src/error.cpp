#include "sam3d/error.hpp"

namespace sam3d {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIoFailure: return "IoFailure";
    case ErrorKind::kFormatError: return "FormatError";
    case ErrorKind::kValueError: return "ValueError";
    case ErrorKind::kEmptyCloud: return "EmptyCloud";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kDomainError: return "DomainError";
    case ErrorKind::kNotNormalized: return "NotNormalized";
    case ErrorKind::kBadKernel: return "BadKernel";
    case ErrorKind::kBadArgs: return "BadArgs";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kNegativeCount: return "NegativeCount";
    case ErrorKind::kSegmenterUnavailable: return "SegmenterUnavailable";
    case ErrorKind::kProtocolError: return "ProtocolError";
    case ErrorKind::kTimeout: return "Timeout";
    case ErrorKind::kEmptyMask: return "EmptyMask";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kNoSupportingPoints: return "NoSupportingPoints";
    case ErrorKind::kPlacementFailure: return "PlacementFailure";
  }
  return "Unknown";
}

}  // namespace sam3d
