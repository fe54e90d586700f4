#pragma once

#include <stdexcept>
#include <string>

namespace lesann {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input violated a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Filesystem or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace lesann
