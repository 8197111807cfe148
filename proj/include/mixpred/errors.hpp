#pragma once

#include <stdexcept>
#include <string>

namespace mixpred {

// Coarse failure classes; the CLI maps them onto exit codes.
enum class ErrorKind {
  Input,       // malformed or invalid data (schema, parse, domain violations)
  Numerical,   // separation, singular systems, degenerate fits
  Infeasible,  // request cannot be satisfied (e.g. too few observations)
};

inline const char* error_kind_name(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Infeasible: return "infeasible";
  }
  return "unknown";
}

/// Process exit status for a failure class.
inline int exit_code(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::Input: return 2;
    case ErrorKind::Numerical: return 3;
    case ErrorKind::Infeasible: return 4;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define MIXPRED_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

// simplex
MIXPRED_DEFINE_ERROR(NonPositiveEntry, Input)
MIXPRED_DEFINE_ERROR(NonFiniteEntry, Input)
MIXPRED_DEFINE_ERROR(NotClosed, Input)
MIXPRED_DEFINE_ERROR(InvalidDimension, Input)
MIXPRED_DEFINE_ERROR(Overflow, Numerical)

// fpca / shared
MIXPRED_DEFINE_ERROR(GridMismatch, Input)
MIXPRED_DEFINE_ERROR(DimensionMismatch, Input)
MIXPRED_DEFINE_ERROR(DegenerateData, Numerical)

// glm
MIXPRED_DEFINE_ERROR(SeparationDetected, Numerical)
MIXPRED_DEFINE_ERROR(SingularHessian, Numerical)
MIXPRED_DEFINE_ERROR(DegenerateResponse, Numerical)

// mixmodel / simulate
MIXPRED_DEFINE_ERROR(ZeroVariance, Numerical)
MIXPRED_DEFINE_ERROR(StudyFailure, Numerical)

// ingestion and protocol
MIXPRED_DEFINE_ERROR(ParseError, Input)
MIXPRED_DEFINE_ERROR(SchemaError, Input)
MIXPRED_DEFINE_ERROR(ZeroPart, Input)
MIXPRED_DEFINE_ERROR(EmptySubsample, Infeasible)
MIXPRED_DEFINE_ERROR(InvalidArgument, Input)

#undef MIXPRED_DEFINE_ERROR

}  // namespace mixpred
