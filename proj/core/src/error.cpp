#include "relupgd/error.hpp"

namespace relupgd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kInvalidParameter: return "invalid-parameter";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kNotRealizable: return "not-realizable";
    case ErrorCode::kZeroVector: return "zero-vector";
    case ErrorCode::kNonFiniteIterate: return "non-finite-iterate";
    case ErrorCode::kInsufficientTrace: return "insufficient-trace";
    case ErrorCode::kUnsupportedCone: return "unsupported-cone";
    case ErrorCode::kNonconvergentLineSearch: return "nonconvergent-line-search";
    case ErrorCode::kSamplingConditionUnmet: return "sampling-condition-unmet";
    case ErrorCode::kZeroEntryInWeights: return "zero-entry-in-s";
    case ErrorCode::kNonpositiveArgument: return "nonpositive-argument";
    case ErrorCode::kConfigParse: return "config-parse";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace relupgd
