#include "tqa/error.hpp"

namespace tqa {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoTableFound: return "NoTableFound";
    case ErrorCode::kMalformedTable: return "MalformedTable";
    case ErrorCode::kDuplicateCellId: return "DuplicateCellId";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kAlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kNoValidPair: return "NoValidPair";
    case ErrorCode::kIntersectionIsIndicator: return "IntersectionIsIndicator";
    case ErrorCode::kLlmUnavailable: return "LlmUnavailable";
    case ErrorCode::kMalformedLlmResponse: return "MalformedLlmResponse";
    case ErrorCode::kNotNumeric: return "NotNumeric";
    case ErrorCode::kGoldCellNotInTable: return "GoldCellNotInTable";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kUnknownQuestionId: return "UnknownQuestionId";
    case ErrorCode::kEmptyValidation: return "EmptyValidation";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace tqa
