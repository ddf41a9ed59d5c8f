#pragma once

#include <stdexcept>
#include <string>

namespace relaybuf {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent scenario configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// Argument outside a function's mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

/// Operation requires a stable buffer (limiting law) but got an unstable one,
/// or vice versa.
struct StabilityError : Error {
    using Error::Error;
};

/// Operation requires a specific signalling mode.
struct ModeError : Error {
    using Error::Error;
};

/// Inputs violate a cross-quantity consistency relation.
struct ConsistencyError : Error {
    using Error::Error;
};

/// Degenerate input (e.g. zero outage at a fit point).
struct DegenerateError : Error {
    using Error::Error;
};

/// Generic numerical failure.
struct NumericError : Error {
    using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance. Carries the
/// best available estimate and the achieved error bound.
struct QuadratureError : NumericError {
    QuadratureError(const std::string& what, double estimate, double bound)
        : NumericError(what), best_estimate(estimate), error_bound(bound) {}
    double best_estimate;
    double error_bound;
};

}  // namespace relaybuf
