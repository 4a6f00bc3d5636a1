#pragma once

#include <stdexcept>
#include <string>

namespace erds {

// Bad numerical input to a pointwise formula (non-positive density, NaN, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Shape or size mismatch between arguments.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid scenario or model setup.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model that is valid on its own but cannot be used for the requested estimate.
struct ModelIncompatible : std::logic_error {
    using std::logic_error::logic_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown by a stepper when the proposed state leaves the positive cone.
struct StepRejected : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace erds
