#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tqa {

enum class ErrorCode {
  kNoTableFound,
  kMalformedTable,
  kDuplicateCellId,
  kEmptyCorpus,
  kProviderUnavailable,
  kDimensionMismatch,
  kAlphaOutOfRange,
  kNoCandidates,
  kNoValidPair,
  kIntersectionIsIndicator,
  kLlmUnavailable,
  kMalformedLlmResponse,
  kNotNumeric,
  kGoldCellNotInTable,
  kParseError,
  kMissingField,
  kUnknownQuestionId,
  kEmptyValidation,
  kConfigError,
  kIoError,
};

std::string_view error_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the evaluation harness, the CLI exit-code mapping) can dispatch
/// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tqa
