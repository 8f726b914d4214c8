#pragma once

#include <stdexcept>
#include <string>

namespace nonlocal {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A coefficient left its declared ellipticity bounds, or is undefined.
class BoundViolation : public Error {
public:
    using Error::Error;
};

/// Elimination hit a pivot below the relative threshold.
class SingularPivot : public Error {
public:
    using Error::Error;
};

/// Caller-side contract violation (bad sizes, ranges, structural preconditions).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A study could not complete (e.g. a refinement level did not converge).
class StudyError : public Error {
public:
    using Error::Error;
};

/// Malformed command line, config file or functional spec.
class UsageError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition)
        throw PreconditionError(message);
}

}  // namespace detail

}  // namespace nonlocal
