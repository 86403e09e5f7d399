#include "mmir/errors.h"

namespace mmir {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyStore: return "EmptyStore";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvalidContent: return "InvalidContent";
    case ErrorCode::kMissingPlaceholder: return "MissingPlaceholder";
    case ErrorCode::kNoScoreFound: return "NoScoreFound";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kUnknownPair: return "UnknownPair";
    case ErrorCode::kAlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::kNotRenormalized: return "NotRenormalized";
    case ErrorCode::kNonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kPositiveLogprob: return "PositiveLogprob";
    case ErrorCode::kEmptyTieSet: return "EmptyTieSet";
    case ErrorCode::kEmptyResults: return "EmptyResults";
    case ErrorCode::kMissingGold: return "MissingGold";
    case ErrorCode::kMissingGoldCandidate: return "MissingGoldCandidate";
    case ErrorCode::kDuplicateQueryId: return "DuplicateQueryId";
    case ErrorCode::kUnknownId: return "UnknownId";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

}  // namespace mmir
