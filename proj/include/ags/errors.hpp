#pragma once

#include <stdexcept>
#include <string>

namespace ags {

// Base class for all library errors so callers can catch the whole family.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A point handed to a prox solver or sampler lies outside the feasible set.
struct NonFeasiblePoint : Error {
  using Error::Error;
};

// Entropy geometry got a reference point with a nonpositive or nonfinite
// component even after the 1e-300 floor was applied.
struct EntropyDomainViolation : Error {
  using Error::Error;
};

// The scalar multiplier search for a constrained prox could not bracket or
// close in on a root within the iteration cap.
struct BisectionFailed : Error {
  using Error::Error;
};

// A log-space or normalization step produced a nonfinite intermediate.
struct NumericalOverflow : Error {
  using Error::Error;
};

// Constants handed to a schedule or planner are out of range (e.g. M < L,
// nonpositive modulus).
struct InvalidConstants : Error {
  using Error::Error;
};

// A step-size schedule failed its validity conditions.
struct ScheduleInvalid : Error {
  using Error::Error;
};

// Multi-stage restarts need a prox-function with quadratic growth; the
// supplied geometry does not have one.
struct GeometryNotQuadraticGrowth : Error {
  using Error::Error;
};

// A smoothing routine was asked to run outside the parameter regime where
// its stage plan is meaningful.
struct RegimeViolated : Error {
  using Error::Error;
};

// A domain-radius bound is missing or nonpositive.
struct InvalidRadius : Error {
  using Error::Error;
};

// Vector/matrix dimensions do not agree.
struct DimensionError : Error {
  using Error::Error;
};

// Bad run configuration (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// A solver failed while running (CLI exit code 3).
struct SolverError : Error {
  using Error::Error;
};

// File read/write failure (CLI exit code 4).
struct IoError : Error {
  using Error::Error;
};

// A race budget does not cover even one iteration of some contestant.
struct BudgetTooSmall : Error {
  using Error::Error;
};

}  // namespace ags
