#pragma once

#include <stdexcept>
#include <string>

namespace polyboltz {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid or incomplete configuration (bad field, missing seed, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A quadrature or eigensolve produced something unusable.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The spectral basis cannot represent what was asked of it.
class BasisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace polyboltz
