#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sgak {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRangeCut,
  kDuplicateCut,
  kEmptyTokenList,
  kDegenerateVector,
  kShapeMismatch,
  kMixedFormPair,
  kNonPositiveDelta,
  kNonPositiveSigma,
  kEmptySequence,
  kSequenceTooLong,
  kTooLargeForEnumeration,
  kPathShapeMismatch,
  kCosineOutOfRange,
  kSizeMismatch,
  kDimensionMismatch,
  kZeroVector,
  kDivergenceDetected,
  kDuplicateDocId,
  kEmptyIndex,
  kMissingGoldId,
  kMalformedExample,
  kIoFailure,
  kBadMagic,
  kVersionMismatch,
  kChecksumMismatch,
  kFormatError,
};

std::string_view error_code_name(ErrorCode code);

// Every library failure is reported through this type; code() is stable and
// is what the CLI and the Python module map onto their own error surfaces.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sgak
