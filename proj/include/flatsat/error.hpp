#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flatsat {

enum class ErrorKind {
  NotPrimePower,
  DivisionByZero,
  MixedFields,
  BudgetExceeded,
  EmptySet,
  TooSmall,
  NotInSpan,
  NotIGP,
  BadDimension,
  EmptyIntersection,
  BadPoint,
  BadParams,
  BadSize,
  BadFlat,
  TooFewPoints,
  NoCycleFound,
  HeavinessViolated,
  SizeMismatch,
  ProbabilityOverflow,
  PreconditionViolated,
  SubstitutionStuck,
  BadJ,
  InvariantViolation,
  ParseError,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::NotPrimePower: return "NotPrimePower";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::MixedFields: return "MixedFields";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::NotInSpan: return "NotInSpan";
    case ErrorKind::NotIGP: return "NotIGP";
    case ErrorKind::BadDimension: return "BadDimension";
    case ErrorKind::EmptyIntersection: return "EmptyIntersection";
    case ErrorKind::BadPoint: return "BadPoint";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::BadSize: return "BadSize";
    case ErrorKind::BadFlat: return "BadFlat";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::NoCycleFound: return "NoCycleFound";
    case ErrorKind::HeavinessViolated: return "HeavinessViolated";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::ProbabilityOverflow: return "ProbabilityOverflow";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::SubstitutionStuck: return "SubstitutionStuck";
    case ErrorKind::BadJ: return "BadJ";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace flatsat
