#pragma once

#include <stdexcept>
#include <string>

namespace dynmarket {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  InvalidMarket,
  LinearUtility,     // rho == 1: demand is not unique
  DegenerateDemand,  // zero or non-finite CES normaliser
  NonConvergence,
  StepFailure,       // a price or bid update left the feasible region
  WrongChannel,
  SupportViolation,
  MassMismatch,
  Schema,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by iterative solvers; carries the residual reached when the budget ran out.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(ErrorCode::NonConvergence, what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace dynmarket
