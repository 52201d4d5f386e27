#pragma once

#include <stdexcept>
#include <string>

namespace hisq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Operand shapes (geometry, rhs count, layout) do not agree.
class ShapeMismatch : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed (singular matrix, non-convergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

class NotFound : public Error {
public:
    using Error::Error;
};

} // namespace hisq
