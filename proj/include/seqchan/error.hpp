#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace seqchan {

enum class ErrorCode {
  NonSquare,
  NotHermitian,
  ConvergenceFailure,
  NegativeEigenvalue,
  DimensionOverflow,
  DimensionMismatch,
  InvalidState,
  InvalidChannel,
  InvalidPovm,
  NormalizationFailure,
  InvalidAlpha,
  OptimizerFailure,
  InfiniteDivergence,
  TauTooLarge,
  ZeroProbabilityOutcome,
  SupportMismatch,
  ExcessiveCensoring,
  DegenerateSampling,
  InvalidArgument,
  ParseError,
};

std::string_view errorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the CLI
// maps them onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(errorCodeName(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace seqchan
