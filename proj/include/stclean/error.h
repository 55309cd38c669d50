#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stclean {

enum class ErrorCode {
  kInvalidArgument,
  kMissingFile,
  kIoFailure,
  kLineCountMismatch,
  kMalformedEntry,
  kNTooLarge,
  kUnknownId,
  kUnsupportedFormat,
  kCorruptHeader,
  kEmptyWindow,
  kBadMagic,
  kDimensionOverflow,
  kTruncatedFile,
  kCharNotInVocab,
  kEmptyNormalizedTranscript,
  kVerdictCoverageMismatch,
  kInfeasibleAlignment,
  kLabelCoverageMismatch,
  kLengthMismatch,
};

std::string_view to_string(ErrorCode code);

// Every data error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stclean
