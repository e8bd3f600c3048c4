#pragma once

#include <stdexcept>
#include <string>

namespace fsl {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter value. The message names the offending field.
struct ConfigError : Error {
    using Error::Error;
};

/// A root bracket could not be established (mesh ratio solve, c(kappa) inversion).
struct BracketError : Error {
    using Error::Error;
};

/// A phase-plane trajectory failed to reach the V-axis within the step cap.
struct NoCrossingError : Error {
    using Error::Error;
};

/// An estimate was requested outside its regime of validity (wrong sign of Q,
/// trace did not terminate the required way).
struct RegimeError : Error {
    using Error::Error;
};

/// Too few samples in the fitting window.
struct InsufficientDataError : Error {
    using Error::Error;
};

} // namespace fsl
