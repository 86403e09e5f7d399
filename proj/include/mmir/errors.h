#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmir {

enum class ErrorCode {
  kMissingFile,
  kSizeMismatch,
  kDuplicateId,
  kZeroVector,
  kDimensionMismatch,
  kEmptyStore,
  kInvalidArgument,
  kParseError,
  kInvalidContent,
  kMissingPlaceholder,
  kNoScoreFound,
  kBackendUnavailable,
  kUnknownPair,
  kAlphaOutOfRange,
  kNotRenormalized,
  kNonPositiveProbability,
  kEmptyList,
  kPositiveLogprob,
  kEmptyTieSet,
  kEmptyResults,
  kMissingGold,
  kMissingGoldCandidate,
  kDuplicateQueryId,
  kUnknownId,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every library failure is reported through this type; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mmir
