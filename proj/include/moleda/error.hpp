#pragma once

#include <stdexcept>
#include <string>

namespace moleda {

/// Base of every domain error. `code()` is the machine-readable identifier
/// shared by the CLI and the HTTP API (e.g. "k_too_large").
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Bad caller-supplied parameters (maps to HTTP 422).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A named resource does not exist (maps to HTTP 404).
class NotFound : public Error {
public:
    using Error::Error;
};

/// The request is valid but the object is in the wrong state (maps to HTTP 409).
class Conflict : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not produce a result.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace moleda
