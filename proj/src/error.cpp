#include "diffcone/error.hpp"

namespace diffcone {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyConstraintSet: return "EmptyConstraintSet";
    case ErrorCode::kSingleLevel: return "SingleLevel";
    case ErrorCode::kUnknownLevel: return "UnknownLevel";
    case ErrorCode::kDegenerateDirection: return "DegenerateDirection";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyLevel: return "EmptyLevel";
    case ErrorCode::kNoReferenceItems: return "NoReferenceItems";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConstantInput: return "ConstantInput";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kMissingPair: return "MissingPair";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNormViolation: return "NormViolation";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  // 0 = success, 1 = unexpected failure, 2 = usage error.
  switch (code) {
    case ErrorCode::kInvalidArgument: return 3;
    case ErrorCode::kIoError: return 4;
    case ErrorCode::kParseError: return 5;
    case ErrorCode::kDimensionMismatch: return 6;
    case ErrorCode::kZeroVector: return 7;
    case ErrorCode::kNormViolation: return 8;
    case ErrorCode::kDuplicateId: return 9;
    case ErrorCode::kEmptyFile: return 10;
    case ErrorCode::kUnknownId: return 11;
    case ErrorCode::kUnknownLevel: return 12;
    case ErrorCode::kSingleLevel: return 13;
    case ErrorCode::kEmptyConstraintSet: return 14;
    case ErrorCode::kDegenerateDirection: return 15;
    case ErrorCode::kEmptyLevel: return 16;
    case ErrorCode::kNoReferenceItems: return 17;
    case ErrorCode::kLengthMismatch: return 18;
    case ErrorCode::kConstantInput: return 19;
    case ErrorCode::kInsufficientData: return 20;
    case ErrorCode::kMissingPair: return 21;
    case ErrorCode::kSingleClass: return 22;
    case ErrorCode::kInvalidSpec: return 23;
  }
  return 1;
}

}  // namespace diffcone
