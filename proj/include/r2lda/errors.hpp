#pragma once

#include <stdexcept>
#include <string>

namespace r2lda {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller handed in something that violates a precondition.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed (non-finite intermediate, solver did not converge).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed file or document.
class FormatError : public Error {
public:
    using Error::Error;
};

/// The observation vector of a linear model is identically zero.
class DegenerateObservation : public Error {
public:
    using Error::Error;
};

}  // namespace r2lda
