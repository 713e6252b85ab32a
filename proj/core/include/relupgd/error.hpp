#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relupgd {

enum class ErrorCode {
  kInvalidSpec,
  kInvalidParameter,
  kDimensionMismatch,
  kNotRealizable,
  kZeroVector,
  kNonFiniteIterate,
  kInsufficientTrace,
  kUnsupportedCone,
  kNonconvergentLineSearch,
  kSamplingConditionUnmet,
  kZeroEntryInWeights,
  kNonpositiveArgument,
  kConfigParse,
  kIo,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this type; `code()` identifies the contract that
// was violated so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the solver when an iterate picks up a NaN or Inf entry.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t iteration, const std::string& message)
      : Error(ErrorCode::kNonFiniteIterate, message), iteration_(iteration) {}

  // Index tau of the first non-finite iterate w_tau.
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace relupgd
