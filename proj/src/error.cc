#include "stclean/error.h"

namespace stclean {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kLineCountMismatch: return "LineCountMismatch";
    case ErrorCode::kMalformedEntry: return "MalformedEntry";
    case ErrorCode::kNTooLarge: return "NTooLarge";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptHeader: return "CorruptHeader";
    case ErrorCode::kEmptyWindow: return "EmptyWindow";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kDimensionOverflow: return "DimensionOverflow";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kCharNotInVocab: return "CharNotInVocab";
    case ErrorCode::kEmptyNormalizedTranscript: return "EmptyNormalizedTranscript";
    case ErrorCode::kVerdictCoverageMismatch: return "VerdictCoverageMismatch";
    case ErrorCode::kInfeasibleAlignment: return "InfeasibleAlignment";
    case ErrorCode::kLabelCoverageMismatch: return "LabelCoverageMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace stclean
