#pragma once

#include <stdexcept>
#include <string>

namespace spinphase {

// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A matrix failed the Hermitian / unit-trace checks of a density matrix.
class InvalidState : public Error {
public:
    using Error::Error;
};

// Smallest eigenvalue below the PSD tolerance.
class NotPositive : public InvalidState {
public:
    NotPositive(const std::string& what, double min_eigenvalue)
        : InvalidState(what), min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

// Rejection sampler ran out of attempts.
class Exhausted : public Error {
public:
    using Error::Error;
};

// Reference state of a relative entropy is (numerically) rank deficient.
class SingularReference : public Error {
public:
    using Error::Error;
};

class StepTooLarge : public Error {
public:
    using Error::Error;
};

// Too many Monte-Carlo samples evaluated to NaN/inf.
class NonFinite : public Error {
public:
    using Error::Error;
};

// Bad user configuration; the message names the offending field.
class InvalidConfig : public Error {
public:
    InvalidConfig(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace spinphase
