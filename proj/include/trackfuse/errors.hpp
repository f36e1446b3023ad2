#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trackfuse {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dimension mismatches and invalid configuration values.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Transformed innovation does not lie in the range of the transformed covariance.
class InconsistentTransform : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

// Stacked information matrix of an association hypothesis is singular.
class UnobservableError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ResourceError : public Error {
public:
    ResourceError(const std::string& what, std::size_t count)
        : Error(what + " (count " + std::to_string(count) + ")"), count_(count) {}

    std::size_t count() const noexcept { return count_; }

private:
    std::size_t count_;
};

}  // namespace trackfuse
