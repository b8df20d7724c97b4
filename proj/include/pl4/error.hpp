#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pl4 {

enum class ErrorCode {
  PreconditionViolation,
  InvalidInput,
  InvalidSurface,
  UnknownName,
  RepeatedEigenvalues,
  NotBothFirstKind,
  DegenerateFirstKindPair,
  NotAdjacent,
  NonSingularTriangle,
  DegenerateFace,
  WrongDimension,
  ContradictionWitness,
  Misaligned,
  NotProductLike,
  NonClosingLeaf,
  SeedSingular,
  NegativeCurvature,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidSurface: return "InvalidSurface";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::RepeatedEigenvalues: return "RepeatedEigenvalues";
    case ErrorCode::NotBothFirstKind: return "NotBothFirstKind";
    case ErrorCode::DegenerateFirstKindPair: return "DegenerateFirstKindPair";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::NonSingularTriangle: return "NonSingularTriangle";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::ContradictionWitness: return "ContradictionWitness";
    case ErrorCode::Misaligned: return "Misaligned";
    case ErrorCode::NotProductLike: return "NotProductLike";
    case ErrorCode::NonClosingLeaf: return "NonClosingLeaf";
    case ErrorCode::SeedSingular: return "SeedSingular";
    case ErrorCode::NegativeCurvature: return "NegativeCurvature";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Process exit codes shared by the CLI and the acceptance suite.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitHypothesis = 2;
inline constexpr int kExitInvalidInput = 3;

inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput:
    case ErrorCode::InvalidSurface:
    case ErrorCode::UnknownName:
    case ErrorCode::PreconditionViolation:
      return kExitInvalidInput;
    default:
      return kExitHypothesis;
  }
}

}  // namespace pl4
