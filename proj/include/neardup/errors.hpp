#pragma once

#include <stdexcept>
#include <string>

namespace neardup {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter combination (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Storage layer failure: missing store, corrupt file, IO error (CLI exit code 3).
class StorageError : public Error {
public:
    using Error::Error;
};

} // namespace neardup
