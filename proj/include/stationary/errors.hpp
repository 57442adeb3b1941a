#pragma once

#include <stdexcept>
#include <string>

namespace stationary {

/// Bad input: parameters out of domain, malformed grids, unknown config keys.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation that was set up correctly but could not deliver its contract.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidInterval : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonIntegralMesh : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UnsamplableInnovation : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class SupportTooSmall : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace stationary
