#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sam3d {

enum class ErrorKind {
  kIoFailure,
  kFormatError,
  kValueError,
  kEmptyCloud,
  kOutOfRange,
  kDomainError,
  kNotNormalized,
  kBadKernel,
  kBadArgs,
  kConfigError,
  kLengthMismatch,
  kNegativeCount,
  kSegmenterUnavailable,
  kProtocolError,
  kTimeout,
  kEmptyMask,
  kEmptyInput,
  kNoSupportingPoints,
  kPlacementFailure,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace sam3d
