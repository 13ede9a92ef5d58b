#pragma once

#include <stdexcept>
#include <string>

namespace warpgeo {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A probe point violates the interior margin of a chart.
class BoundaryError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be invertible or positive definite is not.
class SingularError : public Error {
public:
    using Error::Error;
};

/// Input violates a mathematical admissibility condition; the message
/// names the violated ceiling (e.g. the slope bound for CMC profiles).
class AdmissibilityError : public Error {
public:
    using Error::Error;
};

/// An iterative scheme (quadrature, bisection, inverse iteration) failed
/// to reach its tolerance within the configured budget.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A scenario configuration failed to parse or validate.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace warpgeo
