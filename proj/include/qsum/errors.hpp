#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsum {

enum class ErrorKind {
  InvalidArgument,
  Overflow,
  NonConvergence,
  EnvelopeViolation,
  GridMismatch,
  StripViolation,
  BadDirection,
  SmallDelta,
  BoundViolation,
  DivergentInversion,
  OrderOverflow,
  NoContraction,
  QuadratureStall,
  DomainTooLarge,
  DomainViolation,
  ZeroDivision,
  InvalidSpec,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::EnvelopeViolation: return "EnvelopeViolation";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::StripViolation: return "StripViolation";
    case ErrorKind::BadDirection: return "BadDirection";
    case ErrorKind::SmallDelta: return "SmallDelta";
    case ErrorKind::BoundViolation: return "BoundViolation";
    case ErrorKind::DivergentInversion: return "DivergentInversion";
    case ErrorKind::OrderOverflow: return "OrderOverflow";
    case ErrorKind::NoContraction: return "NoContraction";
    case ErrorKind::QuadratureStall: return "QuadratureStall";
    case ErrorKind::DomainTooLarge: return "DomainTooLarge";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::ZeroDivision: return "ZeroDivision";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is stable and is what
/// callers (and the CLI exit-code mapping) should branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace qsum
