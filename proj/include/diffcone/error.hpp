#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diffcone {

enum class ErrorCode {
  kInvalidArgument,
  kUnknownId,
  kDuplicateId,
  kEmptyConstraintSet,
  kSingleLevel,
  kUnknownLevel,
  kDegenerateDirection,
  kDimensionMismatch,
  kEmptyLevel,
  kNoReferenceItems,
  kLengthMismatch,
  kConstantInput,
  kInsufficientData,
  kMissingPair,
  kSingleClass,
  kParseError,
  kZeroVector,
  kNormViolation,
  kEmptyFile,
  kInvalidSpec,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Process exit status used by the command-line tool for each error.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Detail text without the leading error-code name.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace diffcone
