#pragma once

#include <stdexcept>
#include <string>

namespace texlat {

/// Base class for all library errors. The category decides the CLI exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or parameters supplied by the caller.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Unreadable, malformed or inconsistent input data and files.
class DataError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or degenerate numerics during a computation.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace texlat
