#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tailmoments {

enum class ErrorKind {
  NegativeWeight,
  ZeroSum,
  SupportViolation,
  InvalidIndexSet,
  InvalidData,
  InvalidPerturbation,
  NonPositiveAlpha,
  NonPositiveScale,
  KOutOfRange,
  DegenerateThreshold,
  NoExceedances,
  NonSymmetric,
  EpsOutOfRange,
  NotStandardized,
  DegenerateDirection,
  NonDifferentiable,
  InvalidMeasure,
  InvalidModel,
  ParamOutOfRange,
  InvalidConfig,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::ZeroSum: return "ZeroSum";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::InvalidIndexSet: return "InvalidIndexSet";
    case ErrorKind::InvalidData: return "InvalidData";
    case ErrorKind::InvalidPerturbation: return "InvalidPerturbation";
    case ErrorKind::NonPositiveAlpha: return "NonPositiveAlpha";
    case ErrorKind::NonPositiveScale: return "NonPositiveScale";
    case ErrorKind::KOutOfRange: return "KOutOfRange";
    case ErrorKind::DegenerateThreshold: return "DegenerateThreshold";
    case ErrorKind::NoExceedances: return "NoExceedances";
    case ErrorKind::NonSymmetric: return "NonSymmetric";
    case ErrorKind::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorKind::NotStandardized: return "NotStandardized";
    case ErrorKind::DegenerateDirection: return "DegenerateDirection";
    case ErrorKind::NonDifferentiable: return "NonDifferentiable";
    case ErrorKind::InvalidMeasure: return "InvalidMeasure";
    case ErrorKind::InvalidModel: return "InvalidModel";
    case ErrorKind::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the ErrorKind tags.
/// what() is "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace tailmoments
