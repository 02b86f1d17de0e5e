#pragma once

#include <stdexcept>
#include <string>

namespace chdbc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two grid objects built on different meshes were combined.
class MeshMismatch : public Error {
public:
    using Error::Error;
};

/// A value left the domain of a function, e.g. |phi| >= 1 in the logarithmic potential.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An inverse operator was handed a right-hand side outside the mean-zero space.
class NonZeroMean : public Error {
public:
    using Error::Error;
};

/// A linear solve finished but failed its residual check.
class SolverFailure : public Error {
public:
    using Error::Error;
};

/// Newton iteration did not reach the residual tolerance within the iteration cap.
class NewtonDivergence : public Error {
public:
    using Error::Error;
};

/// The positivity safeguard shrank a Newton step below the admissible floor.
class PositivityLoss : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or serialized input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A time step failed; carries the index of the step being attempted and the
/// message of the underlying error.
class StepError : public Error {
public:
    StepError(long step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

} // namespace chdbc
