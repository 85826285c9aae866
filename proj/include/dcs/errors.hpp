#pragma once

#include <stdexcept>
#include <string>

namespace dcs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad parameters, malformed configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A numerical routine could not meet its accuracy contract.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// The Fock cutoff is too small for the requested state.
class TruncationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace dcs
