#pragma once

#include <stdexcept>
#include <string>

namespace smelab {

// Invalid user-facing configuration (exit category 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical breakdown: blow-up, closed form outside its domain, non-PSD covariance (exit category 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failures (exit category 4).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smelab
