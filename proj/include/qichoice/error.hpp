#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qichoice {

enum class ErrorCode {
  // input / schema problems
  InvalidGraph,
  InvalidPoint,
  InvalidFamily,
  EmptyFamily,
  EmptyMemberSet,
  DuplicateElement,
  FamilyMismatch,
  GraphMismatch,
  DomainNotNet,
  NonPositiveScale,
  UnknownElement,
  NotATree,
  SchemaError,
  // preconditions of a computation
  DisconnectedGraph,
  NotAGeodesic,
  ProfileViolation,
  DepthTooSmall,
  NoAlternateArm,
  NotCoarselySurjective,
  EmptyPreimage,
  ConstantTooSmall,
  DepthError,
  NotQuasiIsometry,
  LabelError,
  ArmCollision,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::InvalidFamily: return "InvalidFamily";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::EmptyMemberSet: return "EmptyMemberSet";
    case ErrorCode::DuplicateElement: return "DuplicateElement";
    case ErrorCode::FamilyMismatch: return "FamilyMismatch";
    case ErrorCode::GraphMismatch: return "GraphMismatch";
    case ErrorCode::DomainNotNet: return "DomainNotNet";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NotAGeodesic: return "NotAGeodesic";
    case ErrorCode::ProfileViolation: return "ProfileViolation";
    case ErrorCode::DepthTooSmall: return "DepthTooSmall";
    case ErrorCode::NoAlternateArm: return "NoAlternateArm";
    case ErrorCode::NotCoarselySurjective: return "NotCoarselySurjective";
    case ErrorCode::EmptyPreimage: return "EmptyPreimage";
    case ErrorCode::ConstantTooSmall: return "ConstantTooSmall";
    case ErrorCode::DepthError: return "DepthError";
    case ErrorCode::NotQuasiIsometry: return "NotQuasiIsometry";
    case ErrorCode::LabelError: return "LabelError";
    case ErrorCode::ArmCollision: return "ArmCollision";
  }
  return "Unknown";
}

// Input errors map to CLI exit status 2, everything else to 3.
inline bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidGraph:
    case ErrorCode::InvalidPoint:
    case ErrorCode::InvalidFamily:
    case ErrorCode::EmptyFamily:
    case ErrorCode::EmptyMemberSet:
    case ErrorCode::DuplicateElement:
    case ErrorCode::FamilyMismatch:
    case ErrorCode::GraphMismatch:
    case ErrorCode::DomainNotNet:
    case ErrorCode::NonPositiveScale:
    case ErrorCode::UnknownElement:
    case ErrorCode::NotATree:
    case ErrorCode::SchemaError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qichoice
