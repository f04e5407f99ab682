// errors.hpp: exception hierarchy shared by every qbm module

#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double achieved = 0.0)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Requested time lies beyond the recurrence-limited validity horizon.
class HorizonError : public Error {
public:
    HorizonError(const std::string& what, double horizon)
        : Error(what), horizon_(horizon) {}
    double horizon() const noexcept { return horizon_; }

private:
    double horizon_;
};

/// Physically meaningless parameter combination (e.g. negative squared frequency).
class ParameterRegimeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Operation intentionally not provided for this configuration.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

}  // namespace qbm
