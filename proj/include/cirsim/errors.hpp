#pragma once

#include <stdexcept>
#include <string>

namespace cirsim {

// Base class for all library errors.
class CirError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid run or model configuration. The CLI maps this family to exit code 2.
class ConfigError : public CirError {
public:
    using CirError::CirError;
};

class NonPositiveParameter : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// 4*k*lambda < sigma^2: the stepping scheme is not defined.
class NegativeAlpha : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public CirError {
public:
    using CirError::CirError;
};

class ConvergenceError : public CirError {
public:
    using CirError::CirError;
};

// A regular step was requested from a state below (3/2)*sigma*r.
class BandRequired : public CirError {
public:
    using CirError::CirError;
};

// The near-zero exit-time sampler needs alpha > 0.
class NearZeroUnavailable : public CirError {
public:
    using CirError::CirError;
};

// Failure to create or write an output artifact.
class OutputError : public CirError {
public:
    using CirError::CirError;
};

} // namespace cirsim
