#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dcp {

/// Base of every library error. Precondition violations use std::invalid_argument.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failures of the numerics themselves (divergence, singular matrices, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

class SimulationDiverged : public NumericalError {
public:
    explicit SimulationDiverged(std::int64_t step)
        : NumericalError("simulation diverged: non-finite state at fine step " + std::to_string(step)),
          step_(step) {}
    std::int64_t step() const { return step_; }

private:
    std::int64_t step_;
};

class SingularDiffusion : public NumericalError {
public:
    explicit SingularDiffusion(std::int64_t index)
        : NumericalError("singular diffusion matrix at increment " + std::to_string(index)),
          index_(index) {}
    std::int64_t index() const { return index_; }

private:
    std::int64_t index_;
};

class NonIntegrableDensity : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateInformation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InvalidContrast : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// No change could be detected or localized on the path.
class NoChangeLocalized : public Error {
public:
    using Error::Error;
};

class NotImplemented : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or command-line input.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace dcp
