#pragma once

#include <stdexcept>
#include <string>

namespace semtts {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension or length mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but numerically unusable (empty, zero variance, fully masked).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Bad argument or configuration value.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace semtts
