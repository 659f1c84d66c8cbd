#pragma once

#include <stdexcept>
#include <string>

namespace forest {

// Bad arguments to an operation (non-finite values, index out of range, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A model configuration that breaks one of the structural conditions the
// model relies on. `condition()` is a stable machine-readable tag.
class ValidationError : public InvalidInput {
public:
    ValidationError(std::string condition, const std::string& message)
        : InvalidInput(condition + ": " + message), condition_(std::move(condition)) {}

    [[nodiscard]] const std::string& condition() const noexcept { return condition_; }

private:
    std::string condition_;
};

// Evaluation requested outside the interval where a quantity is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation not available for this configuration (e.g. a growth-ratio bound
// for a function that has none).
class Unsupported : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// The discretization broke down: negative population, fixed-point divergence,
// CFL failure.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace forest
